"""Phase-space variables a = (a_{1,+}, a_{1,-}, a_{2,+}, a_{2,-}) and norms.

Field ``j`` (1 or 2) carries mass ``j * m``.  Component arrays are stored as
``coef[j - 1, e]`` with ``e = 0`` for the plus sign and ``e = 1`` for minus.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np

from .grid import Grid, SpectralField, omega

SIGNS = (1, -1)


def sign_index(eps: int) -> int:
    if eps not in SIGNS:
        raise ValueError(f"sign must be +1 or -1, got {eps!r}")
    return 0 if eps == 1 else 1


class RealityError(ValueError):
    """The minus components are not the mirrored conjugates of the plus components."""


@dataclass
class PhaseState:
    grid: Grid
    mass: float
    coef: np.ndarray

    def __post_init__(self):
        self.coef = np.asarray(self.coef, dtype=complex)
        if self.coef.shape != (2, 2) + self.grid.shape:
            raise ValueError(f"phase state must have shape (2, 2, n, n), got {self.coef.shape}")
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    @classmethod
    def zeros(cls, grid: Grid, mass: float) -> PhaseState:
        return cls(grid, mass, np.zeros((2, 2) + grid.shape, dtype=complex))

    @classmethod
    def from_plus(cls, grid: Grid, mass: float, plus1, plus2) -> PhaseState:
        """Build a real state from the plus components (arrays or fields); minus is mirrored."""
        coef = np.zeros((2, 2) + grid.shape, dtype=complex)
        for j, p in enumerate((plus1, plus2)):
            if p is None:
                continue
            c = p.coef if isinstance(p, SpectralField) else np.asarray(p)
            coef[j, 0] = c * grid.nyquist_mask
            coef[j, 1] = np.conj(grid.mirror(coef[j, 0]))
        return cls(grid, mass, coef)

    def masses(self) -> tuple[float, float]:
        return (self.mass, 2.0 * self.mass)

    def omegas(self) -> np.ndarray:
        """Array of shape (2, 1, n, n) with omega_{jm} per field."""
        return np.stack([omega(self.grid, self.mass), omega(self.grid, 2.0 * self.mass)])[:, None]

    def component(self, j: int, eps: int) -> SpectralField:
        return SpectralField(self.grid, self.coef[j - 1, sign_index(eps)])

    def with_coef(self, coef: np.ndarray) -> PhaseState:
        return PhaseState(self.grid, self.mass, coef)

    def copy(self) -> PhaseState:
        return self.with_coef(self.coef.copy())

    def _check(self, other: PhaseState):
        if other.grid != self.grid or other.mass != self.mass:
            raise ValueError("phase states differ in grid or mass")

    def __add__(self, other: PhaseState) -> PhaseState:
        self._check(other)
        return self.with_coef(self.coef + other.coef)

    def __sub__(self, other: PhaseState) -> PhaseState:
        self._check(other)
        return self.with_coef(self.coef - other.coef)

    def __mul__(self, scalar) -> PhaseState:
        return self.with_coef(self.coef * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> PhaseState:
        return self.with_coef(-self.coef)

    def reality_defect(self) -> float:
        """E-norm of ``a_- - conj(a_+(-k))`` over both fields."""
        diff = self.coef[:, 1] - np.conj(self.grid.mirror(self.coef[:, 0]))
        w = self.omegas()[:, 0]
        return float(np.sqrt(np.sum(np.abs(diff) ** 2 / w)) * self.grid.dk)

    def enforce_reality(self) -> PhaseState:
        """Symmetrise the minus components onto the mirrored plus components."""
        c = self.coef.copy()
        plus = 0.5 * (c[:, 0] + np.conj(self.grid.mirror(c[:, 1])))
        c[:, 0] = plus
        c[:, 1] = np.conj(self.grid.mirror(plus))
        return self.with_coef(c)


@dataclass
class FieldPair:
    """Real fields phi_j and their time derivatives, shape (2, n, n) each."""

    grid: Grid
    phi: np.ndarray
    phidot: np.ndarray

    def __post_init__(self):
        for name in ("phi", "phidot"):
            arr = np.asarray(getattr(self, name))
            if np.iscomplexobj(arr):
                if np.max(np.abs(arr.imag), initial=0.0) > 0:
                    raise ValueError(f"{name} must be real valued")
                arr = arr.real
            if arr.shape != (2,) + self.grid.shape:
                raise ValueError(f"{name} must have shape (2, n, n)")
            setattr(self, name, arr.astype(float))


def to_phase_space(pair: FieldPair, mass: float) -> PhaseState:
    g = pair.grid
    phi_hat = g.forward_real(pair.phi)
    dot_hat = g.forward_real(pair.phidot)
    w = np.stack([omega(g, mass), omega(g, 2.0 * mass)])
    coef = np.empty((2, 2) + g.shape, dtype=complex)
    coef[:, 0] = dot_hat + 1j * w * phi_hat
    coef[:, 1] = dot_hat - 1j * w * phi_hat
    return PhaseState(g, mass, coef)


def phi_coef(a: PhaseState) -> np.ndarray:
    """Spectral coefficients of phi_j = (2 i omega)^-1 (a_+ - a_-), shape (2, n, n)."""
    w = a.omegas()[:, 0]
    return (a.coef[:, 0] - a.coef[:, 1]) / (2j * w)


def from_phase_space(a: PhaseState, tol: float = 1e-10) -> FieldPair:
    scale = e_norm(a)
    defect = a.reality_defect()
    if defect > tol * max(scale, 1e-300) and defect > tol:
        raise RealityError(f"reality constraint violated: defect {defect:.3e} vs norm {scale:.3e}")
    g = a.grid
    phi = g.inverse(phi_coef(a))
    dot = g.inverse(0.5 * (a.coef[:, 0] + a.coef[:, 1]))
    return FieldPair(g, phi.real, dot.real)


# --- norms -----------------------------------------------------------------

def e_norm(a: PhaseState) -> float:
    """sqrt(sum_{j,eps} ||omega_{jm}^{-1/2} a_{j,eps}||_L2^2)."""
    w = a.omegas()
    return float(np.sqrt(np.sum(np.abs(a.coef) ** 2 / w)) * a.grid.dk)


def multi_indices(order: int, lowest: int = 0):
    return [(p, q) for p in range(order + 1) for q in range(order + 1 - p) if p + q >= lowest]


def _derivatives(f: SpectralField, order: int, lowest: int = 0):
    g = f.grid
    kx, ky = g.kvec
    ikx, iky = 1j * kx, 1j * ky
    for nu in multi_indices(order, lowest):
        yield nu, g.inverse(f.coef * ikx ** nu[0] * iky ** nu[1])


def q_bar_norm(f: SpectralField, n: int) -> float:
    """(sum_{|mu|,|nu| <= n} ||x^mu grad^nu f||^2)^(1/2), x centred on the box."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    g = f.grid
    x, y = g.xvec
    weights = [x ** mu[0] * y ** mu[1] for mu in multi_indices(n)]
    total = 0.0
    for _, d in _derivatives(f, n):
        a2 = np.abs(d) ** 2
        for wgt in weights:
            total += np.sum(a2 * wgt * wgt)
    return float(np.sqrt(total) * g.dx)


def q_norm(f: SpectralField, n: int) -> float:
    """q_bar_n of (I - Delta)^{-1/4} f."""
    return q_bar_norm(SpectralField(f.grid, f.coef * (1.0 + f.grid.ksq) ** -0.25), n)


def q_big_norm(f: SpectralField, N: int) -> float:
    """sup|f| + (sum_{|mu|<=N, 1<=|nu|<=N} ||x^mu (1+|x|^2)^{-1/4} grad^nu f||^2)^(1/2)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    g = f.grid
    x, y = g.xvec
    damp = (1.0 + x * x + y * y) ** -0.5
    weights = [(x ** mu[0] * y ** mu[1]) ** 2 * damp for mu in multi_indices(N)]
    total = 0.0
    for _, d in _derivatives(f, N, lowest=1):
        a2 = np.abs(d) ** 2
        for wgt in weights:
            total += np.sum(a2 * wgt)
    sup = float(np.max(np.abs(g.inverse(f.coef))))
    return sup + float(np.sqrt(total) * g.dx)


def e_N_norm(a: PhaseState, N: int, n_max: int = 4) -> float:
    """Root-sum-of-squares of q_N over the four components.

    This is the q-equivalent stand-in for the enveloping-algebra norm; the
    equivalence constants are not tracked.
    """
    if N > n_max:
        raise ValueError(f"order {N} exceeds n_max={n_max}")
    total = 0.0
    for j, eps in iproduct((1, 2), SIGNS):
        total += q_norm(a.component(j, eps), N) ** 2
    return float(np.sqrt(total))


@dataclass
class NormReport:
    e_norm: float
    q: dict = field(default_factory=dict)
    Q: dict = field(default_factory=dict)
    qbar: dict = field(default_factory=dict)

    def as_row(self, t: float | None = None) -> dict:
        row = {} if t is None else {"t": t}
        row["e_norm"] = self.e_norm
        for n, v in sorted(self.q.items()):
            row[f"q_{n}"] = v
        for n, v in sorted(self.Q.items()):
            row[f"Q_{n}"] = v
        for n, v in sorted(self.qbar.items()):
            row[f"qbar_{n}"] = v
        return row


def norm_report(a: PhaseState, q_orders=(1, 2), Q_orders=()) -> NormReport:
    rep = NormReport(e_norm(a))
    for n in q_orders:
        rep.q[n] = e_N_norm(a, n)
    for N in Q_orders:
        rep.Q[N] = float(np.sqrt(sum(q_big_norm(a.component(j, e), N) ** 2
                                     for j, e in iproduct((1, 2), SIGNS))))
    return rep
