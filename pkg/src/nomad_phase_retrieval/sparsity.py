"""Total variation of a complex field and TV-reducing descent steps."""

from __future__ import annotations

from typing import Optional

import numpy as np

from nomad_phase_retrieval.config import TvParams
from nomad_phase_retrieval.errors import ZeroGradientError
from nomad_phase_retrieval.field import (
    ComplexField,
    divergence,
    grad_central,
    norm2,
)

AUTO_EPSILON_SCALE = 1e-8


def _gradient_magnitude(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    return np.sqrt(np.abs(gx) ** 2 + np.abs(gy) ** 2)


def tv(f: ComplexField) -> float:
    """Isotropic TV with circular central differences, no smoothing."""
    gx, gy = grad_central(f)
    return float(np.sum(_gradient_magnitude(gx.samples, gy.samples)))


def smoothing_epsilon(grad_magnitude: np.ndarray, p: Optional[TvParams]) -> float:
    if p is not None and p.epsilon is not None:
        return p.epsilon
    return AUTO_EPSILON_SCALE * max(1.0, float(np.max(grad_magnitude)))


def tv_gradient(f: ComplexField, p: Optional[TvParams] = None) -> ComplexField:
    """
    Functional gradient of TV with respect to ``conj(f)``:
    ``-1/2 * div(grad f / sqrt(|grad f|^2 + eps^2))``.
    """
    gx, gy = grad_central(f)
    magnitude = _gradient_magnitude(gx.samples, gy.samples)
    eps = smoothing_epsilon(magnitude, p)
    smoothed = np.sqrt(magnitude**2 + eps**2)
    div = divergence(
        gx.with_samples(gx.samples / smoothed),
        gy.with_samples(gy.samples / smoothed),
    )
    return div.with_samples(-0.5 * div.samples)


def tv_unit_direction(f: ComplexField, p: Optional[TvParams] = None) -> ComplexField:
    gradient = tv_gradient(f, p)
    size = norm2(gradient)
    if not size > 0 or not np.isfinite(size):
        raise ZeroGradientError('TV gradient vanishes; field is constant')
    return gradient.with_samples(gradient.samples / size)


def tv_descent_update(f: ComplexField, p: Optional[TvParams] = None) -> np.ndarray:
    """The increment ``t * ||f||_2 * u`` subtracted by one descent step."""
    p = p or TvParams()
    direction = tv_unit_direction(f, p)
    return p.step_scale_t * norm2(f) * direction.samples


def tv_descent_step(f: ComplexField, p: Optional[TvParams] = None) -> ComplexField:
    return f.with_samples(f.samples - tv_descent_update(f, p))
