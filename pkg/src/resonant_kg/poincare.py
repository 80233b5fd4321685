"""Linear and nonlinear representations of the Poincare algebra on phase space."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .dynamics import as_kind, propagate, solve
from .grid import dealiased_product_coef
from .profiles import FreeFlowProfile, ScatteringData, _as_data
from .scattering import wave_operator
from .state import PhaseState, e_norm

GENERATORS = ("P0", "P1", "P2", "R", "N1", "N2")

_SIGN = np.array([1.0, -1.0])[None, :, None, None]


# --- structure constants from affine vector fields on (t, x1, x2) ------------

def _vector_field(tag: str):
    """(A, b) with coefficient field v(y) = A y + b, y = (t, x1, x2)."""
    A = np.zeros((3, 3))
    b = np.zeros(3)
    if tag == "P0":
        b[0] = 1
    elif tag in ("P1", "P2"):
        b[int(tag[1])] = 1
    elif tag in ("N1", "N2"):
        i = int(tag[1])
        A[0, i] = 1  # x_i d/dt
        A[i, 0] = 1  # t d/dx_i
    elif tag == "R":
        # x1 d2 - x2 d1, the orientation of the linear representation on phase space
        A[2, 1] = 1
        A[1, 2] = -1
    else:
        raise ValueError(f"unknown generator {tag!r}")
    return A, b


def _commutator(u, v):
    # [u, v] as derivations: coefficient u(v) - v(u) = A_v (A_u y + b_u) - A_u (A_v y + b_v)
    Au, bu = u
    Av, bv = v
    return Av @ Au - Au @ Av, Av @ bu - Au @ bv


def _flat(field):
    return np.concatenate([field[0].ravel(), field[1]])


@dataclass(frozen=True)
class StructureTable:
    c: np.ndarray  # c[X, Y, Z] with [X, Y] = sum_Z c Z

    def bracket(self, X: str, Y: str) -> dict:
        i, j = GENERATORS.index(X), GENERATORS.index(Y)
        return {Z: float(self.c[i, j, k]) for k, Z in enumerate(GENERATORS) if self.c[i, j, k] != 0}

    def jacobi_residual(self) -> float:
        c = self.c
        # [[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y] in coordinates
        t1 = np.einsum("ijm,mkn->ijkn", c, c)
        res = t1 + np.transpose(t1, (1, 2, 0, 3)) + np.transpose(t1, (2, 0, 1, 3))
        return float(np.max(np.abs(res)))

    def antisymmetry_residual(self) -> float:
        return float(np.max(np.abs(self.c + np.transpose(self.c, (1, 0, 2)))))


@lru_cache(maxsize=1)
def structure_constants() -> StructureTable:
    basis = np.stack([_flat(_vector_field(X)) for X in GENERATORS], axis=1)
    c = np.zeros((6, 6, 6))
    for i, X in enumerate(GENERATORS):
        for j, Y in enumerate(GENERATORS):
            target = _flat(_commutator(_vector_field(X), _vector_field(Y)))
            coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
            if np.max(np.abs(basis @ coef - target), initial=0.0) > 1e-12:
                raise ArithmeticError(f"[{X},{Y}] is not in the span of the basis")
            c[i, j] = np.round(coef, 12)
    return StructureTable(c)


# --- representations -------------------------------------------------------

def _coords(a: PhaseState):
    return a.grid.xvec


def _physical_multiply(a: PhaseState, coef: np.ndarray, weight: np.ndarray) -> np.ndarray:
    g = a.grid
    return g.forward(weight * g.inverse(coef))


def t1_apply(X: str, f: PhaseState) -> PhaseState:
    g = f.grid
    kx, ky = g.kvec
    c = f.coef
    if X == "P0":
        return f.with_coef(1j * _SIGN * f.omegas() * c)
    if X == "P1":
        return f.with_coef(1j * kx * c)
    if X == "P2":
        return f.with_coef(1j * ky * c)
    x1, x2 = _coords(f)
    if X == "R":
        d1 = g.inverse(1j * kx * c)
        d2 = g.inverse(1j * ky * c)
        return f.with_coef(g.forward(x1 * d2 - x2 * d1))
    if X in ("N1", "N2"):
        x = x1 if X == "N1" else x2
        return f.with_coef(1j * _SIGN * f.omegas() * _physical_multiply(f, c, x))
    raise ValueError(f"unknown generator {X!r}")


def _phi(f: PhaseState) -> np.ndarray:
    w = f.omegas()[:, 0]
    return (f.coef[:, 0] - f.coef[:, 1]) / (2j * w)


def _source_bilinear(tag: str, f: PhaseState, h: PhaseState) -> np.ndarray:
    g = f.grid
    pf, ph = _phi(f), _phi(h)
    if tag == "A":
        return dealiased_product_coef(g, pf[0], ph[0])
    return 0.5 * (dealiased_product_coef(g, pf[0], ph[1]) + dealiased_product_coef(g, ph[0], pf[1]))


def t2_bilinear(kind, X: str, f: PhaseState, h: PhaseState) -> PhaseState:
    """Symmetric bilinear form B_X with T^2_X(f) = B_X(f, f)."""
    kind = as_kind(kind, f.mass)
    out = np.zeros_like(f.coef)
    if X in ("P1", "P2", "R"):
        return f.with_coef(out)
    if X not in GENERATORS:
        raise ValueError(f"unknown generator {X!r}")
    F = _source_bilinear(kind.tag, f, h)
    if X in ("N1", "N2"):
        x1, x2 = _coords(f)
        F = _physical_multiply(f, F, x1 if X == "N1" else x2)
    out[kind.forced_field - 1] = F
    return f.with_coef(out)


def t2_apply(kind, X: str, f: PhaseState) -> PhaseState:
    return t2_bilinear(kind, X, f, f)


def t_apply(kind, X: str, f: PhaseState, linear_only: bool = False) -> PhaseState:
    out = t1_apply(X, f)
    if linear_only:
        return out
    return out + t2_apply(kind, X, f)


def dt_apply(kind, X: str, f: PhaseState, h: PhaseState, linear_only: bool = False) -> PhaseState:
    """Frechet derivative DT_X(f; h) = T^1_X h + 2 B_X(f, h)."""
    out = t1_apply(X, h)
    if linear_only:
        return out
    return out + 2.0 * t2_bilinear(kind, X, f, h)


def t_word(kind, word, f: PhaseState, linear_only: bool = False) -> PhaseState:
    """T_Y(f) for words of length <= 2, with T_{YX} = DT_Y.T_X."""
    word = tuple(word)
    if len(word) == 0:
        return f.copy()
    if len(word) == 1:
        return t_apply(kind, word[0], f, linear_only)
    if len(word) == 2:
        Y, X = word
        return dt_apply(kind, Y, f, t_apply(kind, X, f, linear_only), linear_only)
    raise ValueError("words longer than 2 are not supported")


def ordered_words(max_len: int = 2):
    """Standard (lexicographically ordered) enveloping-algebra basis words."""
    words = [()]
    for length in range(1, max_len + 1):
        def rec(prefix, start):
            if len(prefix) == length:
                words.append(tuple(prefix))
                return
            for i in range(start, len(GENERATORS)):
                rec(prefix + [GENERATORS[i]], i)
        rec([], 0)
    return words


def _combination(kind, bracket: dict, f: PhaseState, linear_only: bool) -> PhaseState:
    out = PhaseState.zeros(f.grid, f.mass)
    for Z, c in bracket.items():
        out = out + c * t_apply(kind, Z, f, linear_only)
    return out


def bracket_check(kind, X: str, Y: str, f: PhaseState, linear_only: bool = False,
                  relative: bool = False) -> float:
    """||(DT_X.T_Y - DT_Y.T_X)(f) - T_[X,Y](f)||_E (optionally relative to the larger term)."""
    if X == Y:
        return 0.0
    table = structure_constants()
    xy = t_word(kind, (X, Y), f, linear_only)
    yx = t_word(kind, (Y, X), f, linear_only)
    res = e_norm(xy - yx - _combination(kind, table.bracket(X, Y), f, linear_only))
    if not relative:
        return res
    scale = max(e_norm(xy), e_norm(yx))
    return res / scale if scale > 0 else res


def bracket_matrix(kind, f: PhaseState, linear_only: bool = False, relative: bool = True) -> list:
    return [(X, Y, bracket_check(kind, X, Y, f, linear_only, relative))
            for X, Y in combinations(GENERATORS, 2)]


# --- group action and intertwining ---------------------------------------------

def translate(a: PhaseState, s) -> PhaseState:
    """Space translation x -> x - s (the common U and U^1 action)."""
    kx, ky = a.grid.kvec
    return a.with_coef(a.coef * np.exp(-1j * (kx * s[0] + ky * s[1])))


def intertwine_check(kind, f, shift=None, time_shift: float | None = None, t_max: float = 200.0,
                     dt: float = 0.1) -> float:
    """||U_g(Omega(f)) - Omega(U^1_g f)||_E for a space or a time translation."""
    data = _as_data(f)
    kind = as_kind(kind, data.mass)
    if (shift is None) == (time_shift is None):
        raise ValueError("give exactly one of shift, time_shift")
    base = wave_operator(kind, data, t_max, dt, n_doublings=0, min_t_max=0.0).a0
    if shift is not None:
        lhs = translate(base, shift)
        rhs = wave_operator(kind, data.shifted(shift), t_max, dt, n_doublings=0, min_t_max=0.0).a0
        return e_norm(lhs - rhs)
    if time_shift == 0:
        return 0.0
    lhs = solve(kind, base, 0.0, time_shift, dt, sample_every=None).final
    moved = _time_moved(data, time_shift)
    rhs = wave_operator(kind, moved, t_max, dt, n_doublings=0, min_t_max=0.0).a0
    return e_norm(lhs - rhs)


def _time_moved(data: ScatteringData, s0: float) -> ScatteringData:
    """U^1 for a time translation: the free flow applied to the datum."""
    masses = {1: data.mass, 2: 2.0 * data.mass}
    analytic = {j: FreeFlowProfile(p, masses[j], s0) for j, p in data.analytic.items()}
    return ScatteringData(propagate(data.f, s0), analytic, data.admissible)
