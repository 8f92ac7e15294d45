"""
The complexity parameter zeta: the summed squared central-difference gradient
of an object, computed either from the object itself or from its Fourier
magnitude alone via modified wave numbers ``sin(2*pi*f*d)/d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nomad_phase_retrieval.field import (
    ComplexField,
    check_grid,
    grad_central,
    readonly,
)


@dataclass(frozen=True, eq=False)
class MagnitudeData:
    """
    Fourier magnitudes ``|G|`` (unnormalized DFT convention) together with the
    image-domain sampling intervals the spectrum belongs to.
    """

    values: np.ndarray
    dx: float = 1.0
    dy: float = 1.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, copy=True, order='C')
        check_grid(values.shape, self.dx, self.dy)
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError('magnitudes must be finite and non-negative')
        object.__setattr__(self, 'values', readonly(values))
        object.__setattr__(self, 'dx', float(self.dx))
        object.__setattr__(self, 'dy', float(self.dy))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def complexity_image(f: ComplexField) -> float:
    gx, gy = grad_central(f)
    return float(np.sum(np.abs(gx.samples) ** 2 + np.abs(gy.samples) ** 2))


def modified_wave_number_weights(
    rows: int, cols: int, dx: float = 1.0, dy: float = 1.0
) -> np.ndarray:
    """
    ``sin^2(2*pi*k/rows)/dx^2 + sin^2(2*pi*l/cols)/dy^2`` per DFT bin. Bins above
    the Nyquist index are the negative frequencies; ``sin^2`` needs no shift.
    """
    wx = np.sin(2.0 * np.pi * np.arange(rows) / rows) ** 2 / dx**2
    wy = np.sin(2.0 * np.pi * np.arange(cols) / cols) ** 2 / dy**2
    return wx[:, None] + wy[None, :]


def complexity_fourier(m: MagnitudeData) -> float:
    # 1/(rows*cols) is Parseval's factor for the unnormalized forward DFT
    weights = modified_wave_number_weights(m.rows, m.cols, m.dx, m.dy)
    return float(np.sum(weights * m.values**2) / (m.rows * m.cols))


def complexity_tolerance_band(zeta_target: float, rel_tol: float) -> tuple[float, float]:
    if not zeta_target > 0:
        raise ValueError(f'zeta_target must be positive, got {zeta_target}')
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f'rel_tol must lie in (0, 1), got {rel_tol}')
    return zeta_target * (1.0 - rel_tol), zeta_target * (1.0 + rel_tol)
