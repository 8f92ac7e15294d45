import numpy as np
import pytest

from nomad_phase_retrieval.complexity import (
    MagnitudeData,
    complexity_fourier,
    complexity_image,
)
from nomad_phase_retrieval.config import NoiseSpec
from nomad_phase_retrieval.errors import AllZeroInputError
from nomad_phase_retrieval.field import dft2
from nomad_phase_retrieval.measurement import apply_poisson, forward_magnitude


def test_forward_magnitude_keeps_grid(random_field):
    f = random_field((12, 10), dx=0.5, dy=0.25)
    m = forward_magnitude(f)
    np.testing.assert_allclose(m.values, np.abs(dft2(f).samples))
    assert (m.dx, m.dy) == (0.5, 0.25)


def test_phantom_complexity_is_visible_in_its_magnitude(small_phantom):
    obj, _ = small_phantom
    direct = complexity_image(obj)
    assert complexity_fourier(forward_magnitude(obj)) == pytest.approx(
        direct, rel=1e-12
    )


def test_poisson_noise_is_seeded(small_problem):
    m, _, _ = small_problem
    first = apply_poisson(m, NoiseSpec(photons_per_pixel=1e4, seed=7))
    again = apply_poisson(m, NoiseSpec(photons_per_pixel=1e4, seed=7))
    other = apply_poisson(m, NoiseSpec(photons_per_pixel=1e4, seed=8))
    np.testing.assert_array_equal(first.values, again.values)
    assert not np.array_equal(first.values, other.values)
    assert first.shape == m.shape


def test_total_photon_count_matches_light_level(small_problem):
    m, _, _ = small_problem
    photons = 1e4
    noisy = apply_poisson(m, NoiseSpec(photons_per_pixel=photons, seed=1))
    scale = photons / np.mean(m.values**2)
    counts = noisy.values**2 * scale
    expected = photons * m.values.size
    np.testing.assert_allclose(counts, np.rint(counts), atol=1e-6)
    assert abs(counts.sum() - expected) <= 5 * np.sqrt(expected)


def test_high_light_level_approaches_noiseless(small_problem):
    m, _, _ = small_problem
    noisy = apply_poisson(m, NoiseSpec(photons_per_pixel=1e8, seed=2))
    assert complexity_fourier(noisy) == pytest.approx(complexity_fourier(m), rel=1e-3)


def test_zero_magnitude_cannot_take_noise():
    with pytest.raises(AllZeroInputError):
        apply_poisson(
            MagnitudeData(np.zeros((4, 4))), NoiseSpec(photons_per_pixel=100.0)
        )


def test_noisy_intensity_is_unbiased(random_field):
    m = forward_magnitude(random_field((8, 8)))
    photons, trials = 50.0, 1000
    intensity = m.values**2
    totals = []
    for seed in range(trials):
        noisy = apply_poisson(m, NoiseSpec(photons_per_pixel=photons, seed=seed))
        totals.append(float(np.sum(noisy.values**2)))
    scale = photons / intensity.mean()
    sigma = np.sqrt(intensity.sum() / scale / trials)
    assert abs(np.mean(totals) - intensity.sum()) <= 3 * sigma


def test_extreme_light_level_is_nearly_exact(random_field):
    m = forward_magnitude(random_field((64, 64)))
    noisy = apply_poisson(m, NoiseSpec(photons_per_pixel=1e12, seed=3))
    rel_rms = np.sqrt(np.mean((noisy.values - m.values) ** 2) / np.mean(m.values**2))
    assert rel_rms <= 1e-5  # noqa: PLR2004


def test_light_level_beyond_sampler_range():
    with pytest.raises(ValueError, match='photons_per_pixel'):
        apply_poisson(MagnitudeData(np.ones((4, 4))), NoiseSpec(photons_per_pixel=1e19))
