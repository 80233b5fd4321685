import warnings

import numpy as np
import pytest

from resonant_kg.catalog import gaussian
from resonant_kg.grid import (BandLimitWarning, MultiplierSpec, SpectralField, apply_multiplier,
                              double_frequency_sample, field_from_csv, field_from_npz, field_to_csv, field_to_npz,
                              free_propagate, half_frequency_sample, inverse_transform, make_grid, omega, product,
                              transform)

from conftest import convolution_oracle


def test_mode_spacing():
    g = make_grid(64, 64.0)
    assert g.dk == pytest.approx(2 * np.pi / 64)
    assert g.dk == pytest.approx(0.0982, abs=1e-4)


def test_integer_modes_on_2pi_box():
    g = make_grid(16, 2 * np.pi)
    assert sorted(np.round(g.k1d).astype(int).tolist()) == list(range(-8, 8))
    assert np.allclose(g.k1d, np.round(g.k1d))


@pytest.mark.parametrize("n, L", [(15, 10.0), (16, 0.0), (16, -1.0)])
def test_bad_grids_rejected(n, L):
    with pytest.raises(ValueError):
        make_grid(n, L)


def test_round_trip_random(grid32, rng):
    u = rng.standard_normal(grid32.shape) + 1j * rng.standard_normal(grid32.shape)
    f = transform(grid32, u)
    # the Nyquist row/column is dropped, so compare after removing it once
    v = inverse_transform(f)
    w = inverse_transform(transform(grid32, v))
    assert np.linalg.norm(w - v) <= 1e-12 * np.linalg.norm(v)


def test_constant_field_sits_at_zero_mode(grid32):
    f = transform(grid32, np.full(grid32.shape, 2.5))
    c = f.coef.copy()
    assert abs(c[0, 0]) > 0
    c[0, 0] = 0
    assert np.max(np.abs(c)) < 1e-12 * abs(f.coef[0, 0])
    # (2 pi)^-1 * integral of c over the box
    assert f.coef[0, 0] == pytest.approx(2.5 * 16.0 ** 2 / (2 * np.pi))


def test_gaussian_transform_pair():
    g = make_grid(128, 40.0)
    x, y = g.xvec
    f = transform(g, np.exp(-(x * x + y * y) / 2))
    kx, ky = g.kvec
    exact = np.exp(-(kx * kx + ky * ky) / 2) * g.nyquist_mask
    assert np.max(np.abs(f.coef - exact)) < 1e-12


def test_plancherel(grid32, rng):
    u = rng.standard_normal(grid32.shape)
    f = transform(grid32, inverse_transform(transform(grid32, u)))
    vals = inverse_transform(f)
    assert f.l2_norm() == pytest.approx(grid32.l2_norm_values(vals), rel=1e-12)


def test_multiplier_examples():
    g = make_grid(16, 2 * np.pi)
    f = SpectralField(g, np.ones(g.shape) * g.nyquist_mask)
    w1 = apply_multiplier(f, MultiplierSpec("omega", mass=1.0)).coef
    assert w1[0, 0] == pytest.approx(1.0)
    assert np.allclose(apply_multiplier(f, MultiplierSpec("phase", mass=3.0, sign=-1, time=0.0)).coef, f.coef)
    w2 = omega(g, 2.0)
    assert w2[2, 0] == pytest.approx(np.sqrt(8.0))
    assert w2[2, 0] == pytest.approx(2 * omega(g, 1.0)[1, 0])


def test_half_frequency_omega_identity(grid32):
    # 2 omega_m(k/2) = omega_2m(k) on every mode
    kx, ky = grid32.kvec
    lhs = 2 * np.sqrt(1.3 ** 2 + (kx * kx + ky * ky) / 4)
    assert np.allclose(lhs, omega(grid32, 2.6), rtol=1e-15)


def test_coordinate_multiplier():
    g = make_grid(64, 24.0)
    f = gaussian(1.0, 1.0).sample(g)
    xf = apply_multiplier(f, MultiplierSpec("coordinate", axis=0))
    # (x f)^ = i d/dk f_hat = -i kx f_hat for the unit Gaussian
    kx, ky = g.kvec
    assert np.allclose(xf.coef, 1j * (-kx) * f.coef, atol=1e-10)


def test_free_propagation(grid32, rng):
    c = (rng.standard_normal(grid32.shape) + 1j * rng.standard_normal(grid32.shape)) * grid32.nyquist_mask
    f = SpectralField(grid32, c)
    assert np.array_equal(free_propagate(f, 1.0, 1, 0.0).coef, f.coef)
    g = free_propagate(f, 1.5, -1, 37.5)
    assert g.l2_norm() == pytest.approx(f.l2_norm(), rel=1e-14)
    a = free_propagate(free_propagate(f, 1.5, 1, 2.0), 1.5, 1, 3.0)
    b = free_propagate(f, 1.5, 1, 5.0)
    assert np.max(np.abs(a.coef - b.coef)) < 1e-13 * np.max(np.abs(c))


def test_single_mode_phase():
    g = make_grid(16, 2 * np.pi)
    c = np.zeros(g.shape, complex)
    c[3, 1] = 1.0
    out = free_propagate(SpectralField(g, c), 2.0, -1, 1.7).coef
    assert out[3, 1] == pytest.approx(np.exp(-1j * np.sqrt(4 + 9 + 1) * 1.7))


def test_product_matches_convolution_oracle():
    g = make_grid(32, 12.0)
    a = gaussian(1.0, 1.2, k0=(0.5, 0.0)).sample(g).coef
    b = gaussian(0.7, 0.9, x0=(0.5, 1.0)).sample(g).coef
    got = product(SpectralField(g, a), SpectralField(g, b)).coef
    ref = convolution_oracle(g, a, b)
    assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_product_single_modes_and_zero():
    g = make_grid(16, 2 * np.pi)
    a = np.zeros(g.shape, complex)
    b = np.zeros(g.shape, complex)
    a[1, 0] = 2.0
    b[0, 2] = 3.0
    out = product(SpectralField(g, a), SpectralField(g, b)).coef
    expect = np.zeros(g.shape, complex)
    expect[1, 2] = 6.0 * g.dk ** 2 / (2 * np.pi)
    assert np.allclose(out, expect, atol=1e-14)
    zero = product(SpectralField(g, a), SpectralField.zeros(g)).coef
    assert not np.any(np.abs(zero) > 1e-15)


def test_product_is_commutative(grid32, rng):
    a = (rng.standard_normal(grid32.shape) + 1j * rng.standard_normal(grid32.shape)) * grid32.nyquist_mask
    b = (rng.standard_normal(grid32.shape) + 1j * rng.standard_normal(grid32.shape)) * grid32.nyquist_mask
    fa, fb = SpectralField(grid32, a), SpectralField(grid32, b)
    assert np.allclose(product(fa, fb).coef, product(fb, fa).coef, atol=1e-13)


def test_half_frequency_sampling_gaussian():
    g = make_grid(128, 48.0)
    p = gaussian(1.0, 1.0, k0=(0.3, -0.2), x0=(1.0, 0.0))
    half = half_frequency_sample(p.sample(g)).coef
    kx, ky = g.kvec
    exact = p(kx / 2, ky / 2) * g.nyquist_mask
    assert np.max(np.abs(half - exact)) <= 1e-8 * np.max(np.abs(exact))


def test_double_after_half_is_identity_on_band():
    g = make_grid(64, 48.0)
    f = gaussian(1.0, 0.6).sample(g)
    with warnings.catch_warnings():
        # the half-sampled field is twice as wide; the dropped outer band is expected
        warnings.simplefilter("ignore", BandLimitWarning)
        back = double_frequency_sample(half_frequency_sample(f)).coef
    mi = g.mode_index
    band = (np.abs(mi)[:, None] < g.n // 4) & (np.abs(mi)[None, :] < g.n // 4)
    assert np.max(np.abs(back[band] - f.coef[band])) < 1e-12


def test_resampling_zero_and_warning(grid32):
    z = SpectralField.zeros(grid32)
    assert not np.any(half_frequency_sample(z).coef)
    assert not np.any(double_frequency_sample(z).coef)
    wide = gaussian(1.0, 4.0).sample(grid32)
    with pytest.warns(BandLimitWarning):
        double_frequency_sample(wide)


def test_serialization_round_trip(tmp_path, grid32):
    f = gaussian(0.5 + 0.25j, 1.0, k0=(0.2, 0.1)).sample(grid32)
    text = field_to_csv(f)
    assert text.startswith("# n=32")
    assert "dx2_over_2pi_centered" in text.splitlines()[0]
    assert text.splitlines()[1] == "kx_index,ky_index,re,im"
    import io
    g = field_from_csv(io.StringIO(text))
    assert np.array_equal(g.coef, f.coef) and g.grid == f.grid
    field_to_npz(f, tmp_path / "f.npz")
    h = field_from_npz(tmp_path / "f.npz")
    assert np.array_equal(h.coef, f.coef)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        field_to_csv(f, str(tmp_path / "f.csv"))
    assert np.array_equal(field_from_csv(str(tmp_path / "f.csv")).coef, f.coef)
