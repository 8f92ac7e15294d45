"""
Complex 2D fields on a rectangular grid and the primitives everything else
builds on: the DFT pair, circular central differences, energy and inner product.

Axis 0 is ``x`` (``rows``, spacing ``dx``), axis 1 is ``y`` (``cols``, ``dy``).
The forward DFT is unnormalized and the inverse carries ``1/(rows*cols)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.fft

MIN_AXIS_SAMPLES = 2


def readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def check_grid(shape: tuple[int, ...], dx: float, dy: float) -> None:
    if len(shape) != 2:  # noqa: PLR2004
        raise ValueError(f'expected a 2D grid, got shape {shape}')
    if min(shape) < MIN_AXIS_SAMPLES:
        raise ValueError(
            f'grid {shape} needs at least {MIN_AXIS_SAMPLES} samples per axis'
        )
    if not (dx > 0 and dy > 0):
        raise ValueError(f'sampling intervals must be positive, got dx={dx} dy={dy}')


@dataclass(frozen=True, eq=False)
class ComplexField:
    """
    Row-major complex samples plus the image-domain sampling intervals.

    The same container holds object-domain guesses and their spectra; a spectrum
    keeps the ``dx``/``dy`` of the image it came from.
    """

    samples: np.ndarray
    dx: float = 1.0
    dy: float = 1.0

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.complex128, copy=True, order='C')
        check_grid(samples.shape, self.dx, self.dy)
        object.__setattr__(self, 'samples', readonly(samples))
        object.__setattr__(self, 'dx', float(self.dx))
        object.__setattr__(self, 'dy', float(self.dy))

    @classmethod
    def from_flat(
        cls, values, rows: int, cols: int, dx: float = 1.0, dy: float = 1.0
    ) -> ComplexField:
        values = np.asarray(values, dtype=np.complex128).ravel()
        if values.size != rows * cols:
            raise ValueError(
                f'{values.size} samples cannot fill a {rows}x{cols} grid'
            )
        return cls(values.reshape(rows, cols), dx, dy)

    @property
    def rows(self) -> int:
        return self.samples.shape[0]

    @property
    def cols(self) -> int:
        return self.samples.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.samples.shape

    def with_samples(self, samples: np.ndarray) -> ComplexField:
        """A new field on the same grid."""
        return ComplexField(samples, self.dx, self.dy)

    def __repr__(self) -> str:
        return (
            f'ComplexField(rows={self.rows}, cols={self.cols}, '
            f'dx={self.dx}, dy={self.dy})'
        )


@dataclass(frozen=True, eq=False)
class SupportMask:
    """Object-domain support C; ``inside`` is True on pixels belonging to C."""

    inside: np.ndarray

    def __post_init__(self) -> None:
        inside = np.array(self.inside, dtype=bool, copy=True, order='C')
        check_grid(inside.shape, 1.0, 1.0)
        if inside.all() or not inside.any():
            raise ValueError(
                'support needs at least one pixel inside and one outside'
            )
        object.__setattr__(self, 'inside', readonly(inside))

    @property
    def rows(self) -> int:
        return self.inside.shape[0]

    @property
    def cols(self) -> int:
        return self.inside.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.inside.shape

    @property
    def count(self) -> int:
        return int(self.inside.sum())


class GradientPair(NamedTuple):
    gx: ComplexField
    gy: ComplexField


def dft2(f: ComplexField) -> ComplexField:
    """Unnormalized forward DFT; bin ``k`` sits at ``f_x = k / (rows*dx)``."""
    return f.with_samples(scipy.fft.fft2(f.samples))


def idft2(F: ComplexField) -> ComplexField:  # noqa: N803
    return F.with_samples(scipy.fft.ifft2(F.samples))


def _central_difference(samples: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    return (np.roll(samples, -1, axis=axis) - np.roll(samples, 1, axis=axis)) / (
        2.0 * spacing
    )


def grad_central(f: ComplexField) -> GradientPair:
    """Circular central differences along x (rows) and y (cols)."""
    return GradientPair(
        f.with_samples(_central_difference(f.samples, 0, f.dx)),
        f.with_samples(_central_difference(f.samples, 1, f.dy)),
    )


def divergence(hx: ComplexField, hy: ComplexField) -> ComplexField:
    """
    Circular central-difference divergence. It is the negative adjoint of
    :func:`grad_central`: ``<grad f, h> == <f, -div h>``.
    """
    return hx.with_samples(
        _central_difference(hx.samples, 0, hx.dx)
        + _central_difference(hy.samples, 1, hy.dy)
    )


def power(f: ComplexField) -> float:
    """Sum of squared magnitudes over all pixels."""
    samples = f.samples.ravel()
    return float(np.vdot(samples, samples).real)


def norm2(f: ComplexField) -> float:
    return float(np.sqrt(power(f)))


def inner(f: ComplexField, h: ComplexField) -> complex:
    """``sum(f * conj(h))``."""
    return complex(np.vdot(h.samples.ravel(), f.samples.ravel()))
