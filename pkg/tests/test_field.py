import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nomad_phase_retrieval.field import (
    ComplexField,
    SupportMask,
    dft2,
    divergence,
    grad_central,
    idft2,
    inner,
    norm2,
    power,
)


def naive_dft2(samples):
    rows, cols = samples.shape
    out = np.zeros_like(samples, dtype=np.complex128)
    for k in range(rows):
        for l in range(cols):
            total = 0j
            for x in range(rows):
                for y in range(cols):
                    total += samples[x, y] * np.exp(
                        -2j * np.pi * (k * x / rows + l * y / cols)
                    )
            out[k, l] = total
    return out


def naive_gradient(samples, dx, dy):
    rows, cols = samples.shape
    gx = np.zeros_like(samples)
    gy = np.zeros_like(samples)
    for x in range(rows):
        for y in range(cols):
            gx[x, y] = (samples[(x + 1) % rows, y] - samples[(x - 1) % rows, y]) / (
                2 * dx
            )
            gy[x, y] = (samples[x, (y + 1) % cols] - samples[x, (y - 1) % cols]) / (
                2 * dy
            )
    return gx, gy


def test_field_is_an_immutable_copy():
    source = np.ones((4, 3))
    f = ComplexField(source, dx=0.5, dy=2.0)
    source[0, 0] = 7.0

    assert f.samples[0, 0] == 1.0
    assert f.samples.dtype == np.complex128
    assert f.shape == (4, 3)
    assert (f.rows, f.cols) == (4, 3)
    with pytest.raises(ValueError):
        f.samples[0, 0] = 2.0


@pytest.mark.parametrize(
    'shape, dx, dy',
    [((8,), 1.0, 1.0), ((1, 8), 1.0, 1.0), ((4, 4), 0.0, 1.0), ((4, 4), 1.0, -1.0)],
)
def test_field_rejects_bad_grids(shape, dx, dy):
    with pytest.raises(ValueError):
        ComplexField(np.zeros(shape), dx, dy)


def test_from_flat_is_row_major():
    f = ComplexField.from_flat(np.arange(6), rows=2, cols=3)
    assert f.samples[1, 0] == 3
    with pytest.raises(ValueError):
        ComplexField.from_flat(np.arange(5), rows=2, cols=3)


def test_support_mask_needs_inside_and_outside():
    inside = np.zeros((4, 4), dtype=bool)
    with pytest.raises(ValueError):
        SupportMask(inside)
    with pytest.raises(ValueError):
        SupportMask(~inside)
    inside[1:3, 1:3] = True
    assert SupportMask(inside).count == 4  # noqa: PLR2004


def test_dft_matches_double_sum(random_field):
    f = random_field((5, 4))
    expected = naive_dft2(f.samples)
    np.testing.assert_allclose(
        dft2(f).samples, expected, rtol=0, atol=1e-12 * np.abs(expected).max()
    )


def test_inverse_dft_restores_field_and_grid(random_field):
    f = random_field((7, 5), dx=0.3, dy=1.7)
    back = idft2(dft2(f))
    np.testing.assert_allclose(back.samples, f.samples, atol=1e-12)
    assert (back.dx, back.dy) == (0.3, 1.7)


def test_gradient_matches_index_loop(random_field):
    f = random_field((6, 9), dx=0.5, dy=2.0)
    gx, gy = grad_central(f)
    ex, ey = naive_gradient(f.samples, 0.5, 2.0)
    np.testing.assert_allclose(gx.samples, ex, atol=1e-12)
    np.testing.assert_allclose(gy.samples, ey, atol=1e-12)


def test_divergence_is_negative_adjoint_of_gradient(random_field):
    f = random_field((12, 10), dx=0.7, dy=1.3)
    hx = random_field((12, 10), dx=0.7, dy=1.3)
    hy = random_field((12, 10), dx=0.7, dy=1.3)
    gx, gy = grad_central(f)

    lhs = inner(gx, hx) + inner(gy, hy)
    div = divergence(hx, hy)
    rhs = inner(f, div.with_samples(-div.samples))
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)


def test_gradient_of_constant_vanishes():
    gx, gy = grad_central(ComplexField(np.full((5, 5), 2 - 1j)))
    assert not gx.samples.any()
    assert not gy.samples.any()


def test_power_inner_and_norm_agree(random_field):
    f = random_field((8, 8))
    assert inner(f, f).real == pytest.approx(power(f), rel=1e-14)
    assert inner(f, f).imag == pytest.approx(0.0, abs=1e-10)
    assert norm2(f) ** 2 == pytest.approx(power(f), rel=1e-14)


def test_inner_conjugates_second_argument():
    f = ComplexField(np.full((2, 2), 1j))
    h = ComplexField(np.ones((2, 2)))
    assert inner(f, h) == 4j
    assert inner(h, f) == -4j


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    rows=st.integers(2, 12),
    cols=st.integers(2, 12),
)
def test_parseval_for_unnormalized_forward_dft(seed, rows, cols):
    rng = np.random.default_rng(seed)
    f = ComplexField(
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    )
    assert power(dft2(f)) == pytest.approx(rows * cols * power(f), rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    a=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_gradient_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    shape = (6, 9)
    f, g = (
        ComplexField(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        for _ in range(2)
    )
    combined = grad_central(f.with_samples(a * f.samples + b * g.samples))
    for axis in range(2):
        expected = (
            a * grad_central(f)[axis].samples + b * grad_central(g)[axis].samples
        )
        np.testing.assert_allclose(
            combined[axis].samples, expected, rtol=0, atol=1e-9 * (1 + abs(a) + abs(b))
        )
