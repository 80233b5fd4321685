"""Nonlinear evolution of the phase-space variable and the Cauchy solver."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .grid import dealiased_real_product_coef
from .state import PhaseState, e_norm, e_N_norm, phi_coef

KINDS = ("A", "B")


@dataclass(frozen=True)
class SystemKind:
    """``A``: phi_1^2 drives field 2.  ``B``: phi_1 phi_2 drives field 1."""

    tag: str
    mass: float

    def __post_init__(self):
        if self.tag not in KINDS:
            raise ValueError(f"system kind must be 'A' or 'B', got {self.tag!r}")
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @property
    def masses(self) -> tuple[float, float]:
        return (self.mass, 2.0 * self.mass)

    @property
    def forced_field(self) -> int:
        return 2 if self.tag == "A" else 1


def as_kind(kind, mass: float | None = None) -> SystemKind:
    if isinstance(kind, SystemKind):
        return kind
    if mass is None:
        raise ValueError("mass required when kind is given as a tag")
    return SystemKind(str(kind), float(mass))


class StepRejected(RuntimeError):
    def __init__(self, t: float, growth: float):
        super().__init__(f"step rejected at t={t:.6g}: e_norm grew by factor {growth:.4f}")
        self.t = t
        self.growth = growth


def source_coef(tag: str, a: PhaseState) -> np.ndarray:
    """Spectral coefficients of the real source F (shape (n, n)) for the forced field."""
    phi = phi_coef(a)
    g = a.grid
    if tag == "A":
        return dealiased_real_product_coef(g, phi[0], phi[0])
    return dealiased_real_product_coef(g, phi[0], phi[1])


def nonlinear_term(kind, a: PhaseState) -> PhaseState:
    """T^2_{P0}(a): the source added to both sign components of the forced field."""
    kind = as_kind(kind, a.mass)
    out = np.zeros_like(a.coef)
    F = source_coef(kind.tag, a)
    out[kind.forced_field - 1] = F
    return a.with_coef(out)


def linear_term(a: PhaseState) -> PhaseState:
    sign = np.array([1.0, -1.0])[None, :, None, None]
    return a.with_coef(1j * sign * a.omegas() * a.coef)


def rhs(kind, a: PhaseState) -> PhaseState:
    return linear_term(a) + nonlinear_term(kind, a)


def propagator_symbol(a: PhaseState, t: float) -> np.ndarray:
    """exp(i eps omega_{jm} t) for all four components, shape (2, 2, n, n)."""
    sign = np.array([1.0, -1.0])[None, :, None, None]
    return np.exp(1j * sign * a.omegas() * t)


def propagate(a: PhaseState, t: float) -> PhaseState:
    """Free flow V(t) on all components."""
    if t == 0:
        return a.copy()
    return a.with_coef(propagator_symbol(a, t) * a.coef)


class _RealProducts:
    """Dealiased products of real fields using half-spectrum transforms."""

    def __init__(self, grid, inv_2iw):
        self.grid = grid
        h = grid.n // 2
        self.h = h
        sign = grid._sign[:, : h + 1]
        mask = grid.dealias_mask[:, : h + 1]
        scale = 2.0 * np.pi / (grid.dx * grid.dx)
        # phi_j half coefficients -> physical values, dealias mask folded in
        self.to_phys = [inv_2iw[j][:, : h + 1] * sign * mask * scale for j in (0, 1)]
        self.to_coef = mask * sign / scale
        self.rows = grid._mirror_index

    def phys(self, j: int, c: np.ndarray) -> np.ndarray:
        h = self.h
        return sfft.irfft2((c[0][:, : h + 1] - c[1][:, : h + 1]) * self.to_phys[j], s=self.grid.shape)

    def coef(self, values: np.ndarray) -> np.ndarray:
        h = self.h
        half = sfft.rfft2(values) * self.to_coef
        full = np.empty(self.grid.shape, dtype=complex)
        full[:, : h + 1] = half
        full[:, h + 1:] = np.conj(half[self.rows, 1:h][:, ::-1])
        return full


class _Stepper:
    """Lawson RK4 with cached propagator symbols for a fixed step size.

    Only the forced field needs the full Runge-Kutta stages; the other field
    is free, so its stage values are exact propagations.
    """

    def __init__(self, kind: SystemKind, template: PhaseState, dt: float, nonlinear: bool = True):
        self.kind = kind
        self.dt = dt
        self.nonlinear = nonlinear
        self.grid = template.grid
        self.E_half = propagator_symbol(template, 0.5 * dt)
        self.E_full = self.E_half * self.E_half
        w = template.omegas()
        self.inv_w = 1.0 / w
        self.dk2 = self.grid.dk ** 2
        self.products = _RealProducts(self.grid, 1.0 / (2j * w[:, 0]))
        self._last = None
        self._energy = None

    def energy(self, a: PhaseState) -> float:
        if self._energy is not None and self._energy[0] is a:
            return self._energy[1]
        c = a.coef
        e = float(np.sqrt(np.sum((c.real ** 2 + c.imag ** 2) * self.inv_w) * self.dk2))
        self._energy = (a, e)
        return e

    def _source_A(self, c1):
        p = self.products.phys(0, c1)
        return self.products.coef(p * p)

    def _source_B(self, c1, c2):
        pr = self.products
        return pr.coef(pr.phys(0, c1) * pr.phys(1, c2))

    def __call__(self, a: PhaseState) -> PhaseState:
        Eh, E = self.E_half, self.E_full
        c = a.coef
        new = E * c
        if not self.nonlinear:
            return a.with_coef(new)
        h = self.dt
        if self.kind.tag == "A":
            c1 = c[0]
            if self._last is not None and self._last[0] is a:
                F0 = self._last[1]
            else:
                F0 = self._source_A(c1)
            Fh = self._source_A(Eh[0] * c1)
            F1 = self._source_A(new[0])
            new[1] += (h / 6.0) * (E[1] * F0 + 4.0 * Eh[1] * Fh + F1)
            out = a.with_coef(new)
            self._last = (out, F1)
            return out
        c1, c2 = c[0], c[1]
        E1, Eh1 = E[0], Eh[0]
        c2h = Eh[1] * c2
        k1 = self._source_B(c1, c2)
        k2 = self._source_B(Eh1 * (c1 + 0.5 * h * k1), c2h)
        k3 = self._source_B(Eh1 * c1 + 0.5 * h * k2, c2h)
        k4 = self._source_B(new[0] + h * Eh1 * k3, new[1])
        new[0] += (h / 6.0) * (E1 * k1 + 2.0 * Eh1 * (k2 + k3) + k4)
        return a.with_coef(new)

    def guard(self, old: PhaseState, new: PhaseState, t: float, max_growth: float):
        e0 = self.energy(old)
        e1 = self.energy(new)
        if not np.isfinite(e1):
            raise StepRejected(t, float("inf"))
        if e0 > 0 and e1 > max_growth * e0:
            raise StepRejected(t, e1 / e0)


def step(kind, a: PhaseState, t: float, dt: float, nonlinear: bool = True,
         max_growth: float = 1.1) -> PhaseState:
    """Advance ``a(t)`` to ``a(t + dt)``; ``dt`` may be negative."""
    kind = as_kind(kind, a.mass)
    if dt == 0:
        raise ValueError("dt must be nonzero")
    stepper = _Stepper(kind, a, dt, nonlinear)
    new = stepper(a)
    stepper.guard(a, new, t, max_growth)
    return new


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1:
            d = np.diff(self.times)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("trajectory times must be strictly monotone")

    @property
    def final(self) -> PhaseState:
        return self.states[-1]

    def diagnostics(self, q_order: int | None = 2) -> list[dict]:
        rows = []
        for t, a in zip(self.times, self.states):
            row = {"t": float(t), "e_norm": e_norm(a)}
            if q_order is not None:
                row[f"q_{q_order}"] = e_N_norm(a, q_order)
            row["constraint_drift"] = a.reality_defect()
            rows.append(row)
        return rows

    def to_csv(self, path_or_buf=None, q_order: int | None = 2) -> str | None:
        rows = self.diagnostics(q_order)
        buf = io.StringIO() if path_or_buf is None else None
        handle = buf if buf is not None else (open(path_or_buf, "w", newline="")
                                              if isinstance(path_or_buf, str) else path_or_buf)
        try:
            w = csv.DictWriter(handle, fieldnames=list(rows[0]) if rows else ["t"])
            w.writeheader()
            for r in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        finally:
            if buf is None and isinstance(path_or_buf, str):
                handle.close()
        return buf.getvalue() if buf is not None else None


def n_steps(t0: float, t1: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive (direction is taken from t0, t1)")
    span = abs(t1 - t0)
    n = int(round(span / dt))
    if abs(n * dt - span) > 1e-9 * max(1.0, span):
        raise ValueError(f"|t1 - t0| = {span} is not an integer multiple of dt = {dt}")
    return n


def solve(kind, a0: PhaseState, t0: float, t1: float, dt: float, sample_every: int | None = 1,
          nonlinear: bool = True, max_growth: float = 1.1, sample_times=None) -> Trajectory:
    """Integrate from ``t0`` to ``t1`` (either direction) with step ``|dt|``.

    ``sample_every=None`` stores only the endpoints.  ``sample_times`` (each on
    the step lattice) overrides the cadence.
    """
    kind = as_kind(kind, a0.mass)
    dt = abs(dt)
    n = n_steps(t0, t1, dt)
    h = dt if t1 >= t0 else -dt
    wanted = None
    if sample_times is not None:
        wanted = {n_steps(t0, float(s), dt) for s in sample_times if float(s) != t0}
        if max(wanted, default=0) > n:
            raise ValueError("sample time outside the integration interval")
    stepper = _Stepper(kind, a0, h, nonlinear)
    a = a0.copy()
    times, states = [t0], [a]
    for i in range(1, n + 1):
        t = t0 + (i - 1) * h
        new = stepper(a)
        stepper.guard(a, new, t, max_growth)
        a = new
        if wanted is not None:
            keep = i in wanted or i == n
        else:
            keep = i == n or (sample_every is not None and i % sample_every == 0)
        if keep:
            times.append(t0 + i * h if i < n else t1)
            states.append(a)
    meta = {"integrator": "lawson-rk4", "order": 4, "dt": dt, "n": a0.grid.n, "length": a0.grid.length,
            "kind": kind.tag, "mass": kind.mass}
    return Trajectory(np.array(times), states, meta)
