import numpy as np
import pytest

from resonant_kg.catalog import gaussian, hermite_gaussian
from resonant_kg.grid import SpectralField, make_grid, omega, transform
from resonant_kg.state import (FieldPair, PhaseState, RealityError, e_N_norm, e_norm, from_phase_space, norm_report,
                               q_bar_norm, q_big_norm, q_norm, to_phase_space)
from resonant_kg.dynamics import propagate

from conftest import plus_state


def _gaussian_pair(g):
    x, y = g.xvec
    phi = np.stack([np.exp(-((x - 1) ** 2 + y ** 2) / 2), 0.5 * x * np.exp(-(x * x + y * y) / 3)])
    dot = np.stack([0.3 * np.exp(-(x * x + (y + 1) ** 2) / 2), np.zeros(g.shape)])
    return FieldPair(g, phi, dot)


def test_zero_round_trips(grid32):
    z = FieldPair(grid32, np.zeros((2,) + grid32.shape), np.zeros((2,) + grid32.shape))
    a = to_phase_space(z, 1.0)
    assert not np.any(a.coef)
    back = from_phase_space(PhaseState.zeros(grid32, 1.0))
    assert not np.any(back.phi) and not np.any(back.phidot)


def test_cosine_mode():
    g = make_grid(16, 2 * np.pi)
    x, y = g.xvec
    phi = np.stack([np.cos(2 * x + y), np.zeros(g.shape)])
    a = to_phase_space(FieldPair(g, phi, np.zeros_like(phi)), 1.5)
    spec = transform(g, phi[0]).coef
    w = omega(g, 1.5)
    assert np.allclose(a.coef[0, 0], 1j * w * spec, atol=1e-13)
    assert np.allclose(a.coef[0, 1], -1j * w * spec, atol=1e-13)
    # the cosine lives on +-(2, 1) only
    support = np.argwhere(np.abs(spec) > 1e-12)
    assert {tuple(int(v) for v in g.mode_index[s]) for s in support} == {(2, 1), (-2, -1)}


def test_round_trip_identity():
    pair = _gaussian_pair(make_grid(128, 32.0))
    a = to_phase_space(pair, 0.8)
    assert a.reality_defect() < 1e-14
    back = from_phase_space(a)
    for name in ("phi", "phidot"):
        ref = getattr(pair, name)
        assert np.max(np.abs(getattr(back, name) - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_reality_violation_rejected(grid32):
    a = PhaseState.zeros(grid32, 1.0)
    a.coef[0, 0, 1, 2] = 1.0
    with pytest.raises(RealityError):
        from_phase_space(a)


def test_complex_fields_rejected(grid32):
    bad = np.zeros((2,) + grid32.shape, complex)
    bad[0, 0, 0] = 1j
    with pytest.raises(ValueError):
        FieldPair(grid32, bad, np.zeros((2,) + grid32.shape))


def test_e_norm_single_mode():
    g = make_grid(16, 2 * np.pi)
    A = 0.7 - 0.2j
    plus = np.zeros(g.shape, complex)
    plus[3, 2] = A
    a = PhaseState.from_plus(g, 1.0, plus, None)
    w = np.sqrt(1 + 9 + 4)
    # both sign components carry |A|^2 / omega, quadrature factor dk^2
    assert e_norm(a) == pytest.approx(np.sqrt(2 * abs(A) ** 2 / w) * g.dk, rel=1e-14)
    assert e_norm(PhaseState.zeros(g, 1.0)) == 0.0


def test_e_norm_invariant_under_free_flow(small_state):
    assert e_norm(propagate(small_state, 13.7)) == pytest.approx(e_norm(small_state), rel=1e-14)


def test_q_bar_zero_is_l2(grid64):
    f = gaussian(1.0, 0.9, k0=(0.2, 0.0)).sample(grid64)
    assert q_bar_norm(f, 0) == pytest.approx(f.l2_norm(), rel=1e-12)


def test_q_bar_one_gaussian_moments():
    g = make_grid(128, 32.0)
    x, y = g.xvec
    f = transform(g, np.exp(-(x * x + y * y) / 2))
    # pi (1 + 1 + 1 + 3/2 + 1/2) from the Gaussian moment integrals
    assert q_bar_norm(f, 1) == pytest.approx(np.sqrt(5 * np.pi), rel=1e-10)


def test_q_bar_against_analytic_derivatives():
    g = make_grid(128, 32.0)
    x, y = g.xvec
    u = np.exp(-(x * x + 2 * y * y) / 2)
    ux, uy = -x * u, -2 * y * u
    uxx, uyy, uxy = (x * x - 1) * u, (4 * y * y - 2) * u, 2 * x * y * u
    derivs = [u, uy, ux, uyy, uxy, uxx]
    weights = [np.ones_like(x), y, x, y * y, x * y, x * x]
    ref = np.sqrt(sum(np.sum((w * d) ** 2) for d in derivs for w in weights)) * g.dx
    assert q_bar_norm(transform(g, u), 2) == pytest.approx(ref, rel=1e-6)


def test_q_norm_contracts(grid64, rng):
    for _ in range(3):
        c = (rng.standard_normal(grid64.shape) + 1j * rng.standard_normal(grid64.shape))
        f = SpectralField(grid64, c * np.exp(-grid64.ksq) * grid64.nyquist_mask)
        for n in (0, 1, 2):
            assert q_norm(f, n) <= q_bar_norm(f, n)


def test_q_big_norm_quadrature():
    g = make_grid(128, 32.0)
    x, y = g.xvec
    u = np.exp(-(x * x + y * y) / 2)
    f = transform(g, u)
    # independent quadrature on a finer tensor grid, analytic derivatives
    s = np.linspace(-16, 16, 1601)
    X, Y = np.meshgrid(s, s, indexing="ij")
    U = np.exp(-(X * X + Y * Y) / 2)
    damp = (1 + X * X + Y * Y) ** -0.5
    total = 0.0
    for d in (-X * U, -Y * U):
        for w in (np.ones_like(X), X, Y):
            total += np.trapezoid(np.trapezoid(w * w * damp * d * d, s, axis=1), s)
    assert q_big_norm(f, 1) == pytest.approx(1.0 + np.sqrt(total), rel=1e-6)


def test_q_big_norm_zero_and_constant(grid32):
    assert q_big_norm(SpectralField.zeros(grid32), 1) == 0.0
    c = transform(grid32, np.full(grid32.shape, 0.5))
    assert q_big_norm(c, 2) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(ValueError):
        q_big_norm(c, 0)


def test_e_N_norm_properties(small_state):
    vals = [e_N_norm(small_state, N) for N in range(4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert e_N_norm(PhaseState.zeros(small_state.grid, 1.0), 2) == 0.0
    ratio = vals[0] / e_norm(small_state)
    assert 0.2 < ratio < 5.0
    with pytest.raises(ValueError):
        e_N_norm(small_state, 5)


def test_norm_report_row(small_state):
    rep = norm_report(small_state, q_orders=(1, 2), Q_orders=(1,))
    row = rep.as_row(t=1.0)
    assert row["t"] == 1.0 and row["q_1"] <= row["q_2"]
    assert all(v >= 0 for v in row.values())


def test_plus_state_is_real(grid64):
    a = plus_state(grid64, 1.0, hermite_gaussian(0.4, 0.7, (0, 2)), gaussian(0.2, 0.5, k0=(0.1, 0.3)))
    assert a.reality_defect() == 0.0
