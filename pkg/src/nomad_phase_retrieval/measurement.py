"""Forward model: noiseless Fourier magnitudes and Poisson-limited detection."""

from __future__ import annotations

import numpy as np
import structlog

from nomad_phase_retrieval.complexity import MagnitudeData
from nomad_phase_retrieval.config import NoiseSpec
from nomad_phase_retrieval.errors import AllZeroInputError
from nomad_phase_retrieval.field import ComplexField, dft2

logger = structlog.get_logger(__name__)

# largest rate numpy's Poisson sampler accepts
MAX_POISSON_RATE = float(
    np.iinfo(np.int64).max - 10.0 * np.sqrt(np.iinfo(np.int64).max)
)


def forward_magnitude(g: ComplexField) -> MagnitudeData:
    return MagnitudeData(np.abs(dft2(g).samples), g.dx, g.dy)


def apply_poisson(m: MagnitudeData, spec: NoiseSpec) -> MagnitudeData:
    """
    Scale the intensity so that the detector receives ``photons_per_pixel`` on
    average, draw Poisson counts, and return magnitudes rescaled to the input
    intensity units.
    """
    intensity = m.values**2
    mean_intensity = float(intensity.mean())
    if mean_intensity <= 0:
        raise AllZeroInputError('cannot add photon noise to an all-zero magnitude')

    scale = spec.photons_per_pixel / mean_intensity
    peak_rate = scale * float(intensity.max())
    if peak_rate > MAX_POISSON_RATE:
        raise ValueError(
            f'photons_per_pixel={spec.photons_per_pixel:g} puts {peak_rate:.3g} '
            f'expected counts on the brightest pixel; the sampler limit is '
            f'{MAX_POISSON_RATE:.3g}'
        )
    rng = np.random.default_rng(spec.seed)
    counts = rng.poisson(scale * intensity)
    logger.info(
        'poisson_noise_applied',
        photons_per_pixel=spec.photons_per_pixel,
        seed=spec.seed,
        total_counts=int(counts.sum()),
        zero_pixels=int(np.count_nonzero(counts == 0)),
    )
    return MagnitudeData(np.sqrt(counts / scale), m.dx, m.dy)
