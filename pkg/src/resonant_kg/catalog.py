"""Closed-form Schwartz-class profiles evaluable at arbitrary frequencies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, SpectralField


@dataclass(frozen=True)
class AnalyticProfile:
    """``f_hat(k) = A * ((k - k0)/s)^alpha * exp(-|k - k0|^2 / (2 s^2)) * exp(-i k.x0)``.

    ``width`` is the frequency width ``s``; the physical width is ``1/s``.
    ``poly`` is a multi-index of total degree at most 2 (``(0, 0)`` gives a
    plain Gaussian).  ``conjugate_mirror`` switches to ``conj(f_hat(-k))``,
    which is how the minus component of a real datum is generated.
    """

    amplitude: complex = 1.0
    width: float = 1.0
    k0: tuple[float, float] = (0.0, 0.0)
    x0: tuple[float, float] = (0.0, 0.0)
    poly: tuple[int, int] = (0, 0)
    conjugate_mirror: bool = False

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if min(self.poly) < 0 or sum(self.poly) > 2:
            raise ValueError("polynomial multi-index must have total degree <= 2")

    @property
    def tag(self) -> str:
        return "gaussian" if self.poly == (0, 0) else "hermite-gaussian"

    def _base(self, kx, ky):
        s = self.width
        ux = (kx - self.k0[0]) / s
        uy = (ky - self.k0[1]) / s
        val = self.amplitude * np.exp(-0.5 * (ux * ux + uy * uy) - 1j * (kx * self.x0[0] + ky * self.x0[1]))
        if self.poly[0]:
            val = val * ux ** self.poly[0]
        if self.poly[1]:
            val = val * uy ** self.poly[1]
        return val

    def __call__(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        if self.conjugate_mirror:
            return np.conj(self._base(-kx, -ky))
        return self._base(kx, ky)

    def mirrored(self) -> AnalyticProfile:
        return AnalyticProfile(self.amplitude, self.width, self.k0, self.x0, self.poly,
                               not self.conjugate_mirror)

    def scaled(self, factor: complex) -> AnalyticProfile:
        if self.conjugate_mirror:
            factor = np.conj(factor)
        return AnalyticProfile(self.amplitude * factor, self.width, self.k0, self.x0, self.poly,
                               self.conjugate_mirror)

    def shifted(self, s: tuple[float, float]) -> AnalyticProfile:
        """Profile of ``x -> f(x - s)``."""
        # conj(base(-k)) carries the same exp(-i k.x0) factor, so mirrors shift alike
        x0 = (self.x0[0] + s[0], self.x0[1] + s[1])
        return AnalyticProfile(self.amplitude, self.width, self.k0, x0, self.poly, self.conjugate_mirror)

    def effective_band(self, tol: float = 1e-14) -> float:
        """Radius beyond which ``|f_hat| < tol * |A|`` (polynomial factor included)."""
        deg = sum(self.poly)
        r = np.sqrt(2.0 * np.log(1.0 / tol))
        for _ in range(50):
            r = np.sqrt(2.0 * (np.log(1.0 / tol) + deg * np.log(max(r, 1.0))))
        return float(np.hypot(*self.k0) + self.width * r)

    def sample(self, grid: Grid) -> SpectralField:
        kx, ky = grid.kvec
        return SpectralField(grid, self(kx, ky) * grid.nyquist_mask)

    def physical(self, x, y):
        """Closed-form inverse transform; Gaussian without polynomial factor only."""
        if self.poly != (0, 0):
            raise NotImplementedError("closed-form physical values only for plain Gaussians")
        s = self.width
        xs = np.asarray(x) - self.x0[0]
        ys = np.asarray(y) - self.x0[1]
        v = self.amplitude * s * s * np.exp(-0.5 * s * s * (xs * xs + ys * ys)
                                             + 1j * (self.k0[0] * xs + self.k0[1] * ys))
        if self.conjugate_mirror:
            v = np.conj(v)
        return v


@dataclass(frozen=True)
class ProfileSum:
    """Finite sum of analytic profiles (still evaluable at any frequency)."""

    terms: tuple[AnalyticProfile, ...] = field(default_factory=tuple)

    def __call__(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        out = np.zeros(np.broadcast(kx, np.asarray(ky)).shape, dtype=complex)
        for t in self.terms:
            out = out + t(kx, ky)
        return out

    def mirrored(self) -> ProfileSum:
        return ProfileSum(tuple(t.mirrored() for t in self.terms))

    def scaled(self, factor: complex) -> ProfileSum:
        return ProfileSum(tuple(t.scaled(factor) for t in self.terms))

    def shifted(self, s) -> ProfileSum:
        return ProfileSum(tuple(t.shifted(s) for t in self.terms))

    def effective_band(self, tol: float = 1e-14) -> float:
        return max((t.effective_band(tol) for t in self.terms), default=0.0)

    def sample(self, grid: Grid) -> SpectralField:
        kx, ky = grid.kvec
        return SpectralField(grid, self(kx, ky) * grid.nyquist_mask)


def gaussian(amplitude: complex = 1.0, width: float = 1.0, k0=(0.0, 0.0), x0=(0.0, 0.0)) -> AnalyticProfile:
    return AnalyticProfile(complex(amplitude), float(width), tuple(map(float, k0)), tuple(map(float, x0)))


def hermite_gaussian(amplitude: complex = 1.0, width: float = 1.0, poly=(1, 0), k0=(0.0, 0.0),
                     x0=(0.0, 0.0)) -> AnalyticProfile:
    return AnalyticProfile(complex(amplitude), float(width), tuple(map(float, k0)), tuple(map(float, x0)),
                           tuple(int(p) for p in poly))


# resolved by the default 128 / 64 grid at the 1e-14 band tolerance
DEFAULT_WIDTH = 0.5


def from_entry(entry: dict) -> AnalyticProfile:
    """Build a profile from a config catalog entry."""
    kind = entry.get("type", "gaussian")
    amp = entry.get("amplitude", 1.0)
    if isinstance(amp, (list, tuple)):
        amp = complex(amp[0], amp[1])
    width = entry.get("width", DEFAULT_WIDTH)
    k0 = tuple(entry.get("k0", (0.0, 0.0)))
    x0 = tuple(entry.get("x0", (0.0, 0.0)))
    if kind == "gaussian":
        return gaussian(amp, width, k0, x0)
    if kind == "hermite-gaussian":
        return hermite_gaussian(amp, width, tuple(entry.get("poly", (1, 0))), k0, x0)
    raise ValueError(f"unknown catalog type {kind!r}")
