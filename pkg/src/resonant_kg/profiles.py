"""Modified asymptotic profiles b(t) and the approximate solution a(t) = V(t) b(t)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import as_kind, propagate
from .grid import Grid, double_frequency_sample, half_frequency_sample, omega, SpectralField
from .state import PhaseState

# Orientation of the kind-B generator: db_1/dt ~ KIND_B_SIGN * (1/(4 m t)) L(f_2) b_1.
# The stationary-phase limit of the resonant source fixes it to -1 (see the
# integrand-residual tests, where +1 leaves an O(1/t) remainder).
KIND_B_SIGN = -1.0

SERIES_THRESHOLD = 1e-4


@dataclass(frozen=True)
class FreeFlowProfile:
    """Analytic profile transported by the free flow: ``f_hat(k) exp(i sign w_M(k) s)``."""

    base: object
    mass: float
    time: float
    sign: int = 1

    def __call__(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        w = np.sqrt(self.mass ** 2 + kx * kx + ky * ky)
        return self.base(kx, ky) * np.exp(1j * self.sign * w * self.time)

    def mirrored(self) -> FreeFlowProfile:
        return FreeFlowProfile(self.base.mirrored(), self.mass, self.time, -self.sign)

    def shifted(self, s) -> FreeFlowProfile:
        return FreeFlowProfile(self.base.shifted(s), self.mass, self.time, self.sign)

    def sample(self, grid: Grid) -> SpectralField:
        kx, ky = grid.kvec
        return SpectralField(grid, self(kx, ky) * grid.nyquist_mask)


@dataclass
class ScatteringData:
    """Scattering datum f on a grid, optionally backed by analytic plus-components.

    ``analytic`` maps a field index (1 or 2) to the profile of ``f_{j,+}``; the
    minus component is its conjugate mirror.
    """

    f: PhaseState
    analytic: dict = field(default_factory=dict)
    admissible: bool = True

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def mass(self) -> float:
        return self.f.mass

    @classmethod
    def from_profiles(cls, grid: Grid, mass: float, f1=None, f2=None) -> ScatteringData:
        plus = [None if p is None else p.sample(grid) for p in (f1, f2)]
        state = PhaseState.from_plus(grid, mass, *plus)
        analytic = {j: p for j, p in ((1, f1), (2, f2)) if p is not None}
        data = cls(state, analytic)
        data.admissible = data.growth_surrogate() * 2.0 < 1.0
        return data

    @classmethod
    def from_state(cls, f: PhaseState) -> ScatteringData:
        data = cls(f)
        data.admissible = data.growth_surrogate() * 2.0 < 1.0
        return data

    def shifted(self, s) -> ScatteringData:
        """Datum translated by ``s`` in physical space."""
        g = self.grid
        kx, ky = g.kvec
        phase = np.exp(-1j * (kx * s[0] + ky * s[1]))
        analytic = {j: p.shifted(s) for j, p in self.analytic.items()}
        return ScatteringData(self.f.with_coef(self.f.coef * phase), analytic, self.admissible)

    def is_zero(self, j: int | None = None) -> bool:
        c = self.f.coef if j is None else self.f.coef[j - 1]
        return not np.any(c)

    def at(self, j: int, eps: int, scale: float) -> np.ndarray:
        """Coefficients of ``k -> f_hat_{j,eps}(scale * k)`` on the grid."""
        g = self.grid
        e = 0 if eps == 1 else 1
        prof = self.analytic.get(j)
        if prof is not None and scale != 1:
            if eps == -1:
                prof = prof.mirrored()
            kx, ky = g.kvec
            return prof(scale * kx, scale * ky) * g.nyquist_mask
        base = self.f.coef[j - 1, e]
        if scale == 1:
            return base
        if scale == -1:
            return g.mirror(base)
        if scale == 0.5:
            return half_frequency_sample(SpectralField(g, base)).coef
        if scale == 2:
            return double_frequency_sample(SpectralField(g, base)).coef
        if scale == -0.5:
            return g.mirror(half_frequency_sample(SpectralField(g, base)).coef)
        raise ValueError(f"unsupported frequency scale {scale}")

    def growth_surrogate(self) -> float:
        """(1/4m) sup_k |f_hat_2(2k)|, the measured stand-in for C ||f_2||."""
        if self.is_zero(2):
            return 0.0
        return float(max(np.max(np.abs(self.at(2, e, 2))) for e in (1, -1)) / (4.0 * self.mass))


def _as_data(f) -> ScatteringData:
    if isinstance(f, ScatteringData):
        return f
    if isinstance(f, PhaseState):
        return ScatteringData.from_state(f)
    raise TypeError("expected ScatteringData or PhaseState")


def l_operator(grid: Grid, h, g, h_at_2k=None) -> np.ndarray:
    """((L(h) g)_eps)^(k) = i eps h_eps(2k) g_{-eps}(-k).

    ``h`` and ``g`` are (2, n, n) coefficient arrays indexed by sign (plus
    first).  ``h_at_2k`` supplies ``h_eps(2k)`` directly, e.g. from an analytic
    profile; otherwise the even modes of ``h`` are used.
    """
    h = np.asarray(h)
    g = np.asarray(g)
    if h_at_2k is None:
        h_at_2k = np.stack([double_frequency_sample(SpectralField(grid, h[e])).coef for e in (0, 1)])
    out = np.empty(g.shape, dtype=complex)
    out[0] = 1j * h_at_2k[0] * grid.mirror(g[1])
    out[1] = -1j * h_at_2k[1] * grid.mirror(g[0])
    return out


def _log_a(grid: Grid, m: float, t: float) -> np.ndarray:
    return np.log1p(t * (2 * m) ** 2 / omega(grid, 2 * m))


def _log_b(grid: Grid, m: float, t: float) -> np.ndarray:
    return np.log1p(t * m * m / omega(grid, m))


def resonant_coefficient_A(data: ScatteringData) -> np.ndarray:
    """-i eps (1/8m) f_hat_{1,eps}(k/2)^2 for eps = +, - (shape (2, n, n))."""
    m = data.mass
    out = np.empty((2,) + data.grid.shape, dtype=complex)
    for e, eps in enumerate((1, -1)):
        out[e] = -1j * eps * data.at(1, eps, 0.5) ** 2 / (8.0 * m)
    return out * data.grid.nyquist_mask


def _f2_at_2k(data: ScatteringData) -> np.ndarray:
    return np.stack([data.at(2, eps, 2) for eps in (1, -1)])


def profile_A(f, t: float) -> PhaseState:
    data = _as_data(f)
    if t < 0:
        raise ValueError("profiles are defined for t >= 0")
    b = data.f.copy()
    if t == 0 or data.is_zero(1):
        return b
    b.coef[1] = b.coef[1] + _log_a(data.grid, data.mass, t) * resonant_coefficient_A(data)
    return b


def _sinhc(S: np.ndarray) -> np.ndarray:
    out = np.ones_like(S)
    big = S >= SERIES_THRESHOLD
    out[big] = np.sinh(S[big]) / S[big]
    s2 = S[~big] ** 2
    out[~big] = 1.0 + s2 / 6.0 + s2 * s2 / 120.0
    return out


def profile_B(f, t: float) -> PhaseState:
    """cosh(S) f_1 + (sinh S / S) T with S = ell |f_2(2k)| / 4m and T the generator image."""
    data = _as_data(f)
    if t < 0:
        raise ValueError("profiles are defined for t >= 0")
    b = data.f.copy()
    if t == 0 or data.is_zero(2) or data.is_zero(1):
        return b
    g = data.grid
    m = data.mass
    ell = _log_b(g, m, t)
    h2k = _f2_at_2k(data)
    S = ell * np.abs(h2k) / (4.0 * m)
    T = KIND_B_SIGN * ell / (4.0 * m) * l_operator(g, None, data.f.coef[0], h_at_2k=h2k)
    b.coef[0] = (np.cosh(S) * data.f.coef[0] + _sinhc(S) * T) * g.nyquist_mask
    return b


def profile(kind, f, t: float) -> PhaseState:
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    return profile_A(data, t) if kind.tag == "A" else profile_B(data, t)


def profile_dt(kind, f, t: float) -> PhaseState:
    """Exact time derivative of the profile."""
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    g = data.grid
    m = data.mass
    out = np.zeros_like(data.f.coef)
    if kind.tag == "A":
        if not data.is_zero(1):
            M = 2.0 * m
            rate = M * M / (omega(g, M) + t * M * M)
            out[1] = rate * resonant_coefficient_A(data)
    elif not (data.is_zero(1) or data.is_zero(2)):
        b1 = profile_B(data, t).coef[0]
        rate = m * m / (omega(g, m) + t * m * m)
        out[0] = KIND_B_SIGN * rate / (4.0 * m) * l_operator(g, None, b1, h_at_2k=_f2_at_2k(data))
        out[0] *= g.nyquist_mask
    return data.f.with_coef(out)


def approx_solution(kind, f, t: float) -> PhaseState:
    """a(t) = V(t) b(t)."""
    return propagate(profile(kind, f, t), t)


def generator_series(f, t: float, n_terms: int = 20) -> PhaseState:
    """Truncated exponential series of the kind-B generator applied to f_1 (oracle for the closed form)."""
    data = _as_data(f)
    g = data.grid
    m = data.mass
    ell = _log_b(g, m, t)
    h2k = _f2_at_2k(data)
    term = data.f.coef[0].copy()
    total = term.copy()
    for n in range(1, n_terms + 1):
        term = KIND_B_SIGN * ell / (4.0 * m) * l_operator(g, None, term, h_at_2k=h2k) / n
        total = total + term
    out = data.f.copy()
    out.coef[0] = total * g.nyquist_mask
    return out

