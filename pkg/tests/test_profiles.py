import numpy as np
import pytest

from resonant_kg.catalog import gaussian, hermite_gaussian
from resonant_kg.dynamics import propagate
from resonant_kg.grid import make_grid, omega
from resonant_kg.profiles import (ScatteringData, approx_solution, generator_series, l_operator, profile, profile_A,
                                  profile_B, profile_dt)
from resonant_kg.state import PhaseState, e_norm


@pytest.fixture
def data():
    g = make_grid(64, 32.0)
    return ScatteringData.from_profiles(g, 1.0, gaussian(0.3, 0.6, k0=(0.2, 0.1)),
                                        hermite_gaussian(0.4, 0.5, (1, 0), x0=(0.5, 0.0)))


@pytest.mark.parametrize("kind", ["A", "B"])
def test_profile_at_zero_is_datum(data, kind):
    assert np.array_equal(profile(kind, data, 0.0).coef, data.f.coef)
    with pytest.raises(ValueError):
        profile(kind, data, -1.0)


def test_l_operator_single_modes():
    g = make_grid(16, 2 * np.pi)
    i0, i2, im = (1, 0), (2, 0), (15, 0)
    h = np.zeros((2,) + g.shape, complex)
    h[0][i2] = 2.0
    h[1][i2] = 3.0
    gg = np.zeros((2,) + g.shape, complex)
    gg[1][im] = 1.0 + 1.0j
    gg[0][im] = 5.0
    out = l_operator(g, h, gg)
    # plus: i * h_+(2) * g_-(-1);  minus at k=1: -i * h_-(2) * g_+(-1)
    assert out[0][i0] == pytest.approx(1j * 2.0 * (1 + 1j))
    assert out[1][i0] == pytest.approx(-1j * 3.0 * 5.0)
    assert np.count_nonzero(out) == 2


def test_l_operator_squares_to_modulus(data, rng):
    g = data.grid
    plus = (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)) * np.exp(-g.ksq)
    v = PhaseState.from_plus(g, 1.0, plus, None).coef[0]
    h2k = np.stack([data.at(2, e, 2) for e in (1, -1)])
    twice = l_operator(g, None, l_operator(g, None, v, h_at_2k=h2k), h_at_2k=h2k)
    assert np.allclose(twice, np.abs(h2k[0]) ** 2 * v, atol=1e-14)


def test_profile_A_closed_form(data):
    g = data.grid
    t = 37.0
    b = profile_A(data, t)
    M = 2.0
    kx, ky = g.kvec
    f1 = gaussian(0.3, 0.6, k0=(0.2, 0.1))
    ell = np.log(1 + t * M * M / np.sqrt(M * M + kx * kx + ky * ky))
    plus = data.f.coef[1, 0] - 1j * ell * f1(kx / 2, ky / 2) ** 2 / 8.0
    assert np.allclose(b.coef[1, 0], plus * g.nyquist_mask, atol=1e-15)
    assert np.array_equal(b.coef[0], data.f.coef[0])
    assert b.reality_defect() < 1e-15


def test_profile_B_matches_generator_series(data):
    for t in (1.0, 50.0, 1000.0):
        closed = profile_B(data, t)
        series = generator_series(data, t, n_terms=20)
        assert e_norm(closed - series) <= 1e-10 * e_norm(closed)
        assert closed.reality_defect() < 1e-14


def test_profile_B_trivial_cases(data):
    g = data.grid
    only1 = ScatteringData.from_profiles(g, 1.0, gaussian(0.3, 0.6), None)
    assert np.array_equal(profile_B(only1, 10.0).coef, only1.f.coef)
    only2 = ScatteringData.from_profiles(g, 1.0, None, gaussian(0.3, 0.6))
    assert np.array_equal(profile_B(only2, 10.0).coef, only2.f.coef)


@pytest.mark.parametrize("kind", ["A", "B"])
def test_profile_dt_finite_difference(data, kind):
    t, h = 12.0, 1e-3
    fd = (profile(kind, data, t + h) - profile(kind, data, t - h)) * (1 / (2 * h))
    exact = profile_dt(kind, data, t)
    assert e_norm(fd - exact) <= 1e-6 * e_norm(exact)


def test_approx_solution_is_propagated_profile(data):
    t = 9.5
    a = approx_solution("B", data, t)
    assert np.allclose(a.coef, propagate(profile("B", data, t), t).coef, atol=0)


def test_growth_surrogate():
    g = make_grid(64, 32.0)
    d = ScatteringData.from_profiles(g, 2.0, gaussian(0.1, 0.5), gaussian(0.6, 0.5))
    # sup of a centred Gaussian is its amplitude, reached at k = 0
    assert d.growth_surrogate() == pytest.approx(0.6 / 8.0, rel=1e-12)
    assert d.admissible
    big = ScatteringData.from_profiles(g, 0.5, gaussian(0.1, 0.5), gaussian(2.0, 0.5))
    assert not big.admissible


def test_frequency_scaling_consistency():
    # analytic evaluation and even-mode resampling agree for a well-resolved datum
    g = make_grid(128, 32.0)
    data = ScatteringData.from_profiles(g, 1.0, None, hermite_gaussian(0.4, 0.5, (1, 0), x0=(0.5, 0.0)))
    numeric = ScatteringData(data.f)
    for scale in (2, -1):
        assert np.allclose(numeric.at(2, 1, scale), data.at(2, 1, scale), atol=1e-12)


def test_profile_B_norm_growth_bound(data):
    # |b_1(k)| grows at most like exp(S) with S the log-weighted sup of f_2(2k)
    g = data.grid
    t = 200.0
    b = profile_B(data, t).coef[0]
    S = np.log1p(t / omega(g, 1.0)) * np.abs(data.at(2, 1, 2)) / 4.0
    assert np.all(np.abs(b[0]) <= np.exp(S) * (np.abs(data.f.coef[0, 0]) + np.abs(g.mirror(data.f.coef[0, 1]))) + 1e-15)
