"""Modified wave operator, residual diagnostics and the non-resonant kernel."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decay import DecaySeries
from .dynamics import as_kind, propagate, solve
from .grid import Grid, SpectralField, dealiased_product_coef, omega
from .profiles import ScatteringData, _as_data, approx_solution, profile_dt
from .state import NormReport, PhaseState, e_norm, q_bar_norm, q_norm

SIGNS = (1, -1)


class AdmissibilityError(ValueError):
    pass


@dataclass
class WaveOperatorResult:
    a0: PhaseState
    t_max_used: float
    horizons: list
    convergence_table: list
    diagnostics: DecaySeries | None = None
    extra: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        d = [row[1] for row in self.convergence_table]
        return all(b < a for a, b in zip(d, d[1:]))

    def ratios(self) -> list:
        d = [row[1] for row in self.convergence_table]
        return [a / b if b > 0 else float("inf") for a, b in zip(d, d[1:])]


def check_admissible(kind, data: ScatteringData):
    kind = as_kind(kind, data.mass)
    if kind.tag == "B" and not data.admissible:
        raise AdmissibilityError(
            f"kind-B data outside the small-data region: growth surrogate {data.growth_surrogate():.4g} "
            "(need 2 * surrogate < 1)")


def wave_operator(kind, f, t_max: float, dt: float, n_doublings: int = 1, min_t_max: float = 50.0,
                  ) -> WaveOperatorResult:
    """Omega_+(f) by backward integration from the approximate solution at each horizon.

    Horizons are ``t_max * 2**i`` for ``i = 0..n_doublings``; the returned ``a0``
    comes from the largest one and the table lists ``(T, ||Omega^T - Omega^{2T}||_E)``.
    """
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    if t_max < min_t_max:
        raise ValueError(f"t_max must be at least {min_t_max}")
    if n_doublings < 0:
        raise ValueError("n_doublings must be nonnegative")
    check_admissible(kind, data)
    horizons = [t_max * 2 ** i for i in range(n_doublings + 1)]
    results = []
    for T in horizons:
        aT = approx_solution(kind, data, T)
        traj = solve(kind, aT, T, 0.0, dt, sample_every=None)
        results.append(traj.final)
    table = [(T, e_norm(a - b)) for T, a, b in zip(horizons, results, results[1:])]
    return WaveOperatorResult(results[-1], horizons[-1], horizons, table, extra={"omegas": results})


@dataclass
class ResidualTable:
    times: np.ndarray
    res_modified: np.ndarray
    res_free: np.ndarray
    e_norm: np.ndarray
    constraint_drift: np.ndarray

    def series(self, which: str = "res_modified") -> DecaySeries:
        return DecaySeries(self.times, getattr(self, which), which)

    def rows(self):
        for i in range(len(self.times)):
            yield {"t": float(self.times[i]), "res_modified": float(self.res_modified[i]),
                   "res_free": float(self.res_free[i]), "e_norm": float(self.e_norm[i]),
                   "constraint_drift": float(self.constraint_drift[i])}


def residual_table(kind, f, a0: PhaseState, t_grid, dt: float) -> ResidualTable:
    """Forward-solve from ``a0`` and compare with ``a^(+)(t)`` and with ``V(t) f``."""
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    traj = solve(kind, a0, 0.0, float(t_grid[-1]), dt, sample_times=t_grid)
    lookup = dict(zip(np.round(traj.times, 9), traj.states))
    cols = {k: [] for k in ("mod", "free", "e", "drift")}
    for t in t_grid:
        a = lookup[round(t, 9)]
        cols["mod"].append(e_norm(a - approx_solution(kind, data, t)))
        cols["free"].append(e_norm(a - propagate(data.f, t)))
        cols["e"].append(e_norm(a))
        cols["drift"].append(a.reality_defect())
    return ResidualTable(t_grid, *(np.array(cols[k]) for k in ("mod", "free", "e", "drift")))


def residual_series(kind, f, a0: PhaseState, t_grid, dt: float) -> DecaySeries:
    """``||a(t) - a^(+)(f)(t)||_E`` along the forward solution from ``a0``."""
    return residual_table(kind, f, a0, t_grid, dt).series("res_modified")


# --- Lemma-3 integrand ------------------------------------------------------

def _integrand_components(kind, data: ScatteringData, t: float, part: str):
    """Yield (j, eps, coefficient array) of V(-t) T^2(a^(+)(t)) - b'^(+)(t)."""
    g = data.grid
    m = data.mass
    a = approx_solution(kind, data, t)
    bdot = profile_dt(kind, data, t).coef
    w = (omega(g, m), omega(g, 2 * m))
    phis = [[a.coef[j, e] / (2j * w[j]) for e in (0, 1)] for j in (0, 1)]
    forced = 1 if kind.tag == "A" else 0
    M = (m, 2 * m)[forced]
    for e, eps in enumerate(SIGNS):
        if part == "resonant":
            if kind.tag == "A":
                u = phis[0][e]
                src = dealiased_product_coef(g, u, u)
            else:
                src = -dealiased_product_coef(g, phis[0][1 - e], phis[1][e])
        elif part == "full":
            if kind.tag == "A":
                p = phis[0][0] - phis[0][1]
                src = dealiased_product_coef(g, p, p)
            else:
                src = dealiased_product_coef(g, phis[0][0] - phis[0][1], phis[1][0] - phis[1][1])
        else:
            raise ValueError("part must be 'resonant' or 'full'")
        val = np.exp(-1j * eps * omega(g, M) * t) * src - bdot[forced, e]
        yield forced + 1, eps, val


def integrand_residual(kind, f, t: float, orders=(0,), part: str = "resonant") -> NormReport:
    """Norms of the corrected integrand at time ``t``.

    ``part="resonant"`` keeps only the resonant sign combination of the source
    (the quantity bounded in Lemma 3); ``"full"`` keeps every combination, whose
    oscillating non-resonant terms decay only like 1/t.
    """
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    if t < 1:
        raise ValueError("integrand residual is defined for t >= 1")
    g = data.grid
    comps = list(_integrand_components(kind, data, t, part))
    w = omega(g, data.mass * (1 if comps[0][0] == 1 else 2))
    en = float(np.sqrt(sum(np.sum(np.abs(c) ** 2 / w) for _, _, c in comps)) * g.dk)
    rep = NormReport(en)
    for n in orders:
        rep.qbar[n] = float(np.sqrt(sum(q_bar_norm(SpectralField(g, c), n) ** 2 for _, _, c in comps)))
        rep.q[n] = float(np.sqrt(sum(q_norm(SpectralField(g, c), n) ** 2 for _, _, c in comps)))
    return rep


# --- M_tau norm ---------------------------------------------------------------

def m_tau_norm(times, h, c: float, tau: float, mass: float | None = None) -> float:
    """sup_{t >= tau} (1+t)^c ||(I - Delta) h(t)||_{E_(1)} over the samples.

    ``h`` holds PhaseStates (field 1 is used) or ``(grid, coef)`` pairs with
    ``coef`` of shape (2, n, n), in which case ``mass`` is required.
    """
    if not 0 < c < 1:
        raise ValueError("weight exponent must lie in (0, 1)")
    times = np.asarray(times, dtype=float)
    if len(times) != len(h):
        raise ValueError("times and samples differ in length")
    best = 0.0
    for t, sample in zip(times, h):
        if t < tau:
            continue
        if isinstance(sample, PhaseState):
            g, m, coef = sample.grid, sample.mass, sample.coef[0]
        else:
            g, coef = sample
            m = mass
            if m is None:
                raise ValueError("mass required for raw samples")
        val = np.sqrt(np.sum(np.abs((1.0 + g.ksq) * coef) ** 2 / omega(g, m))) * g.dk
        best = max(best, (1.0 + t) ** c * float(val))
    return best


# --- non-resonant kernel ------------------------------------------------------

def nonresonant_combinations(eps: int):
    return [(e1, e2) for e1 in SIGNS for e2 in SIGNS if e1 + 2 * e2 != eps]


def denominator_gap(grid: Grid, mass: float, eps: int) -> float:
    """min over dealiased modes and non-resonant signs of |eps w_m(p+q) - e1 w_m(p) - e2 w_2m(q)|."""
    m = mass
    kx, ky = grid.kvec
    sel = grid.dealias_mask
    px, py = kx[sel], ky[sel]
    sx = px[:, None] + px[None, :]
    sy = py[:, None] + py[None, :]
    wk = np.sqrt(m * m + sx * sx + sy * sy)
    wp = np.sqrt(m * m + px * px + py * py)[:, None]
    wq = np.sqrt(4 * m * m + px * px + py * py)[None, :]
    return float(min(np.min(np.abs(eps * wk - e1 * wp - e2 * wq)) for e1, e2 in nonresonant_combinations(eps)))


def nonresonant_kernel(grid: Grid, mass: float, g, f2, eps: int, min_gap: float | None = None) -> np.ndarray:
    """Direct-sum K_eps(g, f2) on a small grid (n <= 32).

    ``g`` and ``f2`` are (2, n, n) arrays indexed by sign.  Each summand
    carries the factor e1 e2 coming from phi = sum_e e (2 i w)^-1 a_e.  Inputs
    and output are restricted to the dealiased band so the kernel matches the
    dealiased product exactly.  ``min_gap`` (default ``mass / 2``) is asserted
    against :func:`denominator_gap`.
    """
    n = grid.n
    if n > 32:
        raise ValueError("direct kernel summation is restricted to n <= 32")
    m = mass
    gap = denominator_gap(grid, m, eps)
    need = 0.5 * m if min_gap is None else min_gap
    if gap < need:
        raise ValueError(f"non-resonant denominator gap {gap:.4g} below {need:.4g}")
    mask = grid.dealias_mask
    w1 = omega(grid, m)
    w2 = omega(grid, 2 * m)
    G = {e1: np.asarray(g)[0 if e1 == 1 else 1] * mask / (2j * w1) for e1 in SIGNS}
    H = {e2: np.asarray(f2)[0 if e2 == 1 else 1] * mask / (2j * w2) for e2 in SIGNS}
    idx = grid.mode_index
    kx, ky = grid.kvec
    out = np.zeros(grid.shape, dtype=complex)
    pts = np.argwhere(mask)
    half = n // 2
    for a, b in pts:
        # q = k - p for every output k, in signed mode indices, no wraparound
        qi = idx[:, None] - idx[a]
        qj = idx[None, :] - idx[b]
        valid = (qi >= -half) & (qi < half) & (qj >= -half) & (qj < half)
        qi_w = np.where(valid, qi % n, 0)
        qj_w = np.where(valid, qj % n, 0)
        qx, qy = kx[qi_w, qj_w], ky[qi_w, qj_w]
        wq2 = np.sqrt(4 * m * m + qx * qx + qy * qy)
        wk1 = w1
        pxv, pyv = kx[a, b], ky[a, b]
        wp1 = np.sqrt(m * m + pxv * pxv + pyv * pyv)
        for e1, e2 in nonresonant_combinations(eps):
            hv = np.where(valid, H[e2][qi_w, qj_w], 0.0)
            d = 1.0 / (eps * wk1 - e1 * wp1 - e2 * wq2)
            out += e1 * e2 * d * G[e1][a, b] * hv
    return (1j / (2 * np.pi)) * grid.dk ** 2 * out * mask


def nonresonant_source(grid: Grid, mass: float, g, f2, eps: int) -> np.ndarray:
    """Non-resonant part of the kind-B source for the sign ``eps`` of field 1."""
    w1 = omega(grid, mass)
    w2 = omega(grid, 2 * mass)
    out = np.zeros(grid.shape, dtype=complex)
    for e1, e2 in nonresonant_combinations(eps):
        u = np.asarray(g)[0 if e1 == 1 else 1] / (2j * w1)
        v = np.asarray(f2)[0 if e2 == 1 else 1] / (2j * w2)
        out += e1 * e2 * dealiased_product_coef(grid, u, v)
    return out
