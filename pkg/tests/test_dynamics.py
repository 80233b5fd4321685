import numpy as np
import pytest

from resonant_kg.catalog import gaussian
from resonant_kg.dynamics import (SystemKind, StepRejected, n_steps, nonlinear_term, propagate, rhs, solve, source_coef,
                                  step)
from resonant_kg.experiments import measured_order
from resonant_kg.grid import make_grid, transform
from resonant_kg.state import FieldPair, PhaseState, e_norm, to_phase_space

from conftest import plus_state


def _reference_lawson(kind, a, dt):
    """Textbook Lawson RK4 built from the generic right-hand side."""
    def g(s, b):
        # interaction picture: V(-s) N(V(s) b)
        return propagate(nonlinear_term(kind, propagate(b, s)), -s)

    k1 = g(0, a)
    k2 = g(dt / 2, a + k1 * (dt / 2))
    k3 = g(dt / 2, a + k2 * (dt / 2))
    k4 = g(dt, a + k3 * dt)
    return propagate(a + (k1 + k2 * 2 + k3 * 2 + k4) * (dt / 6), dt)


def test_kind_validation():
    with pytest.raises(ValueError):
        SystemKind("C", 1.0)
    with pytest.raises(ValueError):
        SystemKind("A", 0.0)
    assert SystemKind("B", 0.5).masses == (0.5, 1.0)


@pytest.mark.parametrize("tag", ["A", "B"])
def test_zero_data_stays_zero(grid32, tag):
    z = PhaseState.zeros(grid32, 1.0)
    out = solve(tag, z, 0.0, 2.0, 0.25).final
    assert not np.any(out.coef)


@pytest.mark.parametrize("tag", ["A", "B"])
def test_step_matches_reference_lawson(small_state, tag):
    a = small_state * 3.0
    for dt in (0.2, -0.3):
        fast = step(tag, a, 0.0, dt)
        ref = _reference_lawson(tag, a, dt)
        assert e_norm(fast - ref) <= 1e-13 * e_norm(a)


def test_kind_a_first_field_is_free(small_state):
    out = solve("A", small_state, 0.0, 3.0, 0.1).final
    free = propagate(small_state, 3.0)
    assert np.max(np.abs(out.coef[0] - free.coef[0])) < 1e-14
    assert e_norm(out - free) > 1e-6


def test_linear_mode_is_exact(small_state):
    out = solve("B", small_state, 0.0, 5.0, 0.5, nonlinear=False).final
    assert np.allclose(out.coef, propagate(small_state, 5.0).coef, rtol=0, atol=1e-15)


@pytest.mark.parametrize("tag", ["A", "B"])
def test_fourth_order(small_state, tag):
    order = measured_order(tag, small_state * 4.0, 4.0, 0.4)
    assert order >= 3.8


@pytest.mark.parametrize("tag", ["A", "B"])
def test_forward_backward(small_state, tag):
    fwd = solve(tag, small_state, 0.0, 4.0, 0.05).final
    back = solve(tag, fwd, 4.0, 0.0, 0.05).final
    assert e_norm(back - small_state) < 1e-6 * e_norm(small_state)


def test_reality_preserved(small_state):
    traj = solve("B", small_state, 0.0, 5.0, 0.1, sample_every=10)
    rows = traj.diagnostics(q_order=None)
    assert max(r["constraint_drift"] for r in rows) < 1e-10 * e_norm(small_state)
    assert len(rows) == 6


def test_cosine_square_source():
    g = make_grid(16, 2 * np.pi)
    x, y = g.xvec
    cos = np.cos(2 * x + y)
    pair = FieldPair(g, np.stack([cos, np.zeros(g.shape)]), np.zeros((2,) + g.shape))
    F = source_coef("A", to_phase_space(pair, 1.0))
    # cos^2 = 1/2 + cos(2 theta) / 2, both inside the dealiased band
    assert np.allclose(F, transform(g, cos * cos).coef, atol=1e-13)
    support = {tuple(int(v) for v in g.mode_index[s]) for s in np.argwhere(np.abs(F) > 1e-12)}
    assert support == {(0, 0), (4, 2), (-4, -2)}


def test_nonlinear_term_hits_forced_field(small_state):
    for tag, field in (("A", 1), ("B", 0)):
        N = nonlinear_term(tag, small_state)
        assert not np.any(N.coef[1 - field])
        assert np.array_equal(N.coef[field, 0], N.coef[field, 1])
    r = rhs("A", small_state)
    assert e_norm(r) > 0


def test_step_guard(small_state):
    with pytest.raises(StepRejected):
        step("A", small_state * 50.0, 0.0, 1.0, max_growth=1.01)
    with pytest.raises(ValueError):
        step("A", small_state, 0.0, 0.0)


def test_step_lattice():
    assert n_steps(0.0, 1.0, 0.1) == 10
    assert n_steps(2.0, 0.0, 0.5) == 4
    with pytest.raises(ValueError):
        n_steps(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        n_steps(0.0, 1.0, -0.1)


def test_trajectory_csv(small_state):
    traj = solve("A", small_state, 0.0, 1.0, 0.1, sample_times=[0.5])
    assert list(traj.times) == [0.0, 0.5, 1.0]
    text = traj.to_csv(q_order=1)
    assert text.splitlines()[0] == "t,e_norm,q_1,constraint_drift"
    assert len(text.splitlines()) == 4


def test_scalar_gaussian_kind_b_energy_growth_is_small():
    g = make_grid(64, 32.0)
    a = plus_state(g, 1.0, gaussian(0.05, 0.7), gaussian(0.05, 0.7, k0=(0.3, 0.0)))
    out = solve("B", a, 0.0, 20.0, 0.1, sample_every=None).final
    assert abs(e_norm(out) / e_norm(a) - 1) < 0.05
