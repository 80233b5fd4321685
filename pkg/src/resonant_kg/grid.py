"""Periodic spectral fields on an N x N box.

Coefficients follow the unitary-in-the-continuum convention

    f_hat(k) = (2 pi)^-1 \\int exp(-i k.x) f(x) dx,

discretised on the centred physical grid ``x_j = -L/2 + j dx``.  With that
choice ``||f||_L2^2 = sum |f_hat|^2 dk^2`` holds exactly on the grid and the
pointwise product has the transform ``(2 pi)^-1 f_hat * g_hat``.

Modes are stored in numpy FFT order along both axes (index 0 is k = 0,
index n/2 is the Nyquist row which is kept at exactly zero).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Literal

import numpy as np
import scipy.fft as sfft

NORMALIZATION_TAG = "dx2_over_2pi_centered"

#: fraction of the Nyquist wavenumber retained by the 2/3-rule truncation
DEALIAS_FRACTION = 2.0 / 3.0


class BandLimitWarning(UserWarning):
    """Raised (as a warning) when a resampling step discards spectral content."""


@dataclass(frozen=True)
class Grid:
    n: int
    length: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n <= 0 or self.n % 2:
            raise ValueError(f"grid size must be a positive even integer, got {self.n!r}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"box length must be positive, got {self.length!r}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def k_nyquist(self) -> float:
        return np.pi / self.dx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Signed integer mode index per axis, FFT order."""
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)

    @cached_property
    def k1d(self) -> np.ndarray:
        return self.dk * self.mode_index

    @cached_property
    def kvec(self) -> tuple[np.ndarray, np.ndarray]:
        kx, ky = np.meshgrid(self.k1d, self.k1d, indexing="ij")
        kx.flags.writeable = False
        ky.flags.writeable = False
        return kx, ky

    @cached_property
    def ksq(self) -> np.ndarray:
        kx, ky = self.kvec
        return kx * kx + ky * ky

    @cached_property
    def x1d(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @cached_property
    def xvec(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.x1d, self.x1d, indexing="ij"))

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on every mode except the Nyquist row and column."""
        keep = self.mode_index != -self.n // 2
        return keep[:, None] & keep[None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        kmax = DEALIAS_FRACTION * self.k_nyquist
        return self.ksq <= kmax * kmax

    @cached_property
    def _sign(self) -> np.ndarray:
        # exp(i k L/2) for the centred grid origin
        s = np.where(self.mode_index % 2 == 0, 1.0, -1.0)
        return s[:, None] * s[None, :]

    @cached_property
    def _mirror_index(self) -> np.ndarray:
        return (-np.arange(self.n)) % self.n

    def mirror(self, coef: np.ndarray) -> np.ndarray:
        """Return ``c(-k)`` for coefficient arrays whose last two axes are modes."""
        idx = self._mirror_index
        return coef[..., idx, :][..., :, idx]

    # forward/inverse transforms on raw arrays (last two axes)
    def forward(self, values: np.ndarray) -> np.ndarray:
        c = sfft.fft2(values, axes=(-2, -1))
        c *= (self.dx * self.dx / (2.0 * np.pi)) * self._sign
        c *= self.nyquist_mask
        return c

    def inverse(self, coef: np.ndarray) -> np.ndarray:
        return sfft.ifft2(coef * self._sign, axes=(-2, -1)) * (2.0 * np.pi / (self.dx * self.dx))

    def forward_real(self, values: np.ndarray) -> np.ndarray:
        """Forward transform of a real array, returned on the full mode grid."""
        half = sfft.rfft2(values, axes=(-2, -1))
        h = self.n // 2
        full = np.empty(values.shape[:-2] + self.shape, dtype=complex)
        full[..., :, : h + 1] = half
        # remaining columns from Hermitian symmetry c(-k) = conj(c(k))
        rows = self._mirror_index
        full[..., :, h + 1 :] = np.conj(half[..., rows, 1:h][..., :, ::-1])
        full *= (self.dx * self.dx / (2.0 * np.pi)) * self._sign
        full *= self.nyquist_mask
        return full

    def inverse_real(self, coef: np.ndarray) -> np.ndarray:
        """Inverse transform of a Hermitian coefficient array to real samples."""
        h = self.n // 2
        half = (coef * self._sign)[..., :, : h + 1]
        return sfft.irfft2(half, s=self.shape, axes=(-2, -1)) * (2.0 * np.pi / (self.dx * self.dx))

    def l2_norm_coef(self, coef: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(coef) ** 2)) * self.dk)

    def l2_norm_values(self, values: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(values) ** 2)) * self.dx)


def make_grid(n: int, length: float) -> Grid:
    """Build a grid; ``n`` must be even and at least 16."""
    if int(n) != n or n % 2:
        raise ValueError(f"grid size must be even, got {n!r}")
    if n < 16:
        raise ValueError(f"grid size must be at least 16, got {n}")
    return Grid(int(n), float(length))


@dataclass
class SpectralField:
    grid: Grid
    coef: np.ndarray

    def __post_init__(self):
        self.coef = np.asarray(self.coef, dtype=complex)
        if self.coef.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {self.coef.shape} does not match grid {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralField:
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def copy(self) -> SpectralField:
        return SpectralField(self.grid, self.coef.copy())

    def l2_norm(self) -> float:
        return self.grid.l2_norm_coef(self.coef)

    def values(self) -> np.ndarray:
        return inverse_transform(self)

    def _check(self, other: SpectralField):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coef + other.coef)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coef - other.coef)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coef * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coef)


def transform(grid: Grid, values: np.ndarray) -> SpectralField:
    """Physical samples on ``grid.xvec`` to spectral coefficients.

    The Nyquist row/column is discarded, so only fields without Nyquist
    content survive a round trip unchanged.
    """
    values = np.asarray(values)
    if values.shape != grid.shape:
        raise ValueError(f"sample shape {values.shape} does not match grid {grid.shape}")
    return SpectralField(grid, grid.forward(values.astype(complex, copy=False)))


def inverse_transform(f: SpectralField) -> np.ndarray:
    return f.grid.inverse(f.coef)


@lru_cache(maxsize=64)
def omega(grid: Grid, mass: float) -> np.ndarray:
    """Klein-Gordon symbol sqrt(M^2 + |k|^2) on the grid."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    w = np.sqrt(mass * mass + grid.ksq)
    w.flags.writeable = False
    return w


@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier multiplier (or coordinate multiplication) description.

    kinds and parameters:
      ``omega``               mass, power         omega_M(k)^power
      ``one_minus_laplacian`` power               (1 + |k|^2)^power
      ``phase``               mass, sign, time    exp(i sign omega_M(k) t)
      ``derivative``          axis                i k_axis
      ``coordinate``          axis                x_axis (physical space)
    """

    kind: Literal["omega", "one_minus_laplacian", "phase", "derivative", "coordinate"]
    mass: float = 1.0
    power: float = 1.0
    sign: int = 1
    time: float = 0.0
    axis: int = 0

    def symbol(self, grid: Grid) -> np.ndarray:
        if self.kind == "omega":
            return omega(grid, self.mass) ** self.power
        if self.kind == "one_minus_laplacian":
            return (1.0 + grid.ksq) ** self.power
        if self.kind == "phase":
            return np.exp(1j * self.sign * self.time * omega(grid, self.mass))
        if self.kind == "derivative":
            return 1j * grid.kvec[self.axis]
        raise ValueError(f"multiplier kind {self.kind!r} has no Fourier symbol")


def apply_multiplier(f: SpectralField, spec: MultiplierSpec) -> SpectralField:
    grid = f.grid
    if spec.kind == "coordinate":
        if spec.axis not in (0, 1):
            raise ValueError("coordinate axis must be 0 or 1")
        vals = inverse_transform(f) * grid.xvec[spec.axis]
        return transform(grid, vals)
    return SpectralField(grid, f.coef * spec.symbol(grid))


def free_propagate(f: SpectralField, mass: float, sign: int, t: float) -> SpectralField:
    """Apply exp(i sign omega_M(-i grad) t)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return SpectralField(f.grid, f.coef * np.exp(1j * sign * t * omega(f.grid, mass)))


def dealiased_product_coef(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """2/3-rule product of complex coefficient arrays (broadcast over leading axes)."""
    m = grid.dealias_mask
    prod = grid.inverse(a * m) * grid.inverse(b * m)
    return grid.forward(prod) * m


def dealiased_real_product_coef(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """As :func:`dealiased_product_coef` for Hermitian inputs (real fields)."""
    m = grid.dealias_mask
    prod = grid.inverse_real(a * m) * grid.inverse_real(b * m)
    return grid.forward_real(prod) * m


def product(f: SpectralField, g: SpectralField) -> SpectralField:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return SpectralField(f.grid, dealiased_product_coef(f.grid, f.coef, g.coef))


def half_frequency_sample(f: SpectralField) -> SpectralField:
    """Field whose coefficient at mode k is f_hat(k/2).

    Uses zero-padding of the physical samples into a box of side 2L, which
    samples the transform on the half-spaced frequency lattice.  Exact for
    fields that vanish at the edge of the original box.
    """
    grid = f.grid
    n = grid.n
    vals = inverse_transform(f)
    edge = np.concatenate([vals[0], vals[-1], vals[:, 0], vals[:, -1]])
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    if scale > 0 and np.max(np.abs(edge)) > 1e-10 * scale:
        warnings.warn("field does not vanish at the box edge; half-frequency sampling is approximate",
                      BandLimitWarning, stacklevel=2)
    big = Grid(2 * n, 2 * grid.length)
    padded = np.zeros(big.shape, dtype=complex)
    lo = n // 2
    padded[lo : lo + n, lo : lo + n] = vals
    c_big = big.forward(padded)
    idx = grid.mode_index % (2 * n)
    out = c_big[idx][:, idx] * grid.nyquist_mask
    return SpectralField(grid, out)


def double_frequency_sample(f: SpectralField) -> SpectralField:
    """Field whose coefficient at mode k is f_hat(2k); zero where 2k leaves the grid."""
    grid = f.grid
    n = grid.n
    mi = grid.mode_index
    inside = np.abs(mi) < n // 4
    src = (2 * mi) % n
    out = np.zeros(grid.shape, dtype=complex)
    sel = np.ix_(inside, inside)
    out[sel] = f.coef[np.ix_(src[inside], src[inside])]
    lost = f.coef.copy()
    lost[np.ix_(src[inside], src[inside])] = 0.0
    # odd modes inside the half band are not lost; they are simply not sampled
    half_band = (np.abs(mi)[:, None] < n // 4) & (np.abs(mi)[None, :] < n // 4)
    lost[half_band] = 0.0
    total = np.sum(np.abs(f.coef) ** 2)
    if total > 0 and np.sum(np.abs(lost) ** 2) > 1e-20 * total:
        warnings.warn("input has content outside |k| < k_nyq/2; double-frequency sampling drops it",
                      BandLimitWarning, stacklevel=2)
    return SpectralField(grid, out)


# --- serialisation -------------------------------------------------------

def field_to_csv(f: SpectralField, path_or_buf=None) -> str | None:
    """Write ``(kx_index, ky_index, re, im)`` rows after a ``#`` header line."""
    buf = io.StringIO()
    buf.write(f"# n={f.grid.n} length={f.grid.length!r} normalization={NORMALIZATION_TAG}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kx_index", "ky_index", "re", "im"])
    mi = f.grid.mode_index
    ix, iy = np.nonzero(f.coef)
    for a, b in zip(ix, iy):
        c = f.coef[a, b]
        w.writerow([int(mi[a]), int(mi[b]), repr(float(c.real)), repr(float(c.imag))])
    text = buf.getvalue()
    if path_or_buf is None:
        return text
    if hasattr(path_or_buf, "write"):
        path_or_buf.write(text)
    else:
        with open(path_or_buf, "w") as fh:
            fh.write(text)
    return None


def field_from_csv(path_or_buf) -> SpectralField:
    if hasattr(path_or_buf, "read"):
        text = path_or_buf.read()
    else:
        with open(path_or_buf) as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing field header")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    if meta.get("normalization") != NORMALIZATION_TAG:
        raise ValueError(f"unsupported normalization {meta.get('normalization')!r}")
    grid = Grid(int(meta["n"]), float(meta["length"]))
    coef = np.zeros(grid.shape, dtype=complex)
    n = grid.n
    for row in csv.DictReader(lines[1:]):
        coef[int(row["kx_index"]) % n, int(row["ky_index"]) % n] = complex(float(row["re"]), float(row["im"]))
    return SpectralField(grid, coef)


def field_to_npz(f: SpectralField, path) -> None:
    np.savez(path, n=f.grid.n, length=f.grid.length, normalization=NORMALIZATION_TAG, coef=f.coef)


def field_from_npz(path) -> SpectralField:
    with np.load(path) as d:
        if str(d["normalization"]) != NORMALIZATION_TAG:
            raise ValueError("unsupported normalization")
        return SpectralField(Grid(int(d["n"]), float(d["length"])), d["coef"])
