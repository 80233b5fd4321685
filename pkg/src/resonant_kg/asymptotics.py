"""Light-cone expansion of free Klein-Gordon solutions and resonant products.

A homogeneous function g(t, x) = t^d G(x / t) supported in the forward cone is
stored through its t = 1 slice G on a uniform grid covering [-1, 1]^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .decay import DecaySeries
from .grid import Grid, SpectralField, dealiased_product_coef, omega
from .state import q_bar_norm

# order-6 central differences
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


class SupportOverflow(ValueError):
    """Slice support reaches the rim of its disk (or the cone leaves the box)."""


class InterpolationError(RuntimeError):
    pass


def band_of(profile, band: float | None = None, tol: float = 1e-14) -> float:
    if band is not None:
        return float(band)
    if hasattr(profile, "effective_band"):
        return float(profile.effective_band(tol))
    raise ValueError("profile has no effective band; pass band=")


@dataclass
class ConeSlice:
    values: np.ndarray
    radius: float
    degree: int
    mass: float
    sign: int
    exact: object = None
    _spline: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.values.shape[0]
        if self.values.shape != (n, n):
            raise ValueError("slice values must be square")
        if not 0 < self.radius < 1:
            raise ValueError("support radius must lie in (0, 1)")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x1d(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.n)

    @property
    def h(self) -> float:
        return 2.0 / (self.n - 1)

    def xy(self):
        return np.meshgrid(self.x1d, self.x1d, indexing="ij")

    def disk(self) -> np.ndarray:
        x, y = self.xy()
        return x * x + y * y <= self.radius ** 2

    def like(self, values, degree: int | None = None, exact=None) -> ConeSlice:
        return ConeSlice(values, self.radius, self.degree if degree is None else degree, self.mass, self.sign,
                         exact)

    def boundary_ring_max(self, width: int = 3) -> float:
        x, y = self.xy()
        r = np.sqrt(x * x + y * y)
        ring = (r <= self.radius) & (r >= self.radius - width * self.h)
        return float(np.max(np.abs(self.values[ring]), initial=0.0))

    def _splines(self, k: int = 3):
        if self._spline is None or self._spline[0] != k:
            x = self.x1d
            self._spline = (k, RectBivariateSpline(x, x, self.values.real, kx=k, ky=k),
                            RectBivariateSpline(x, x, self.values.imag, kx=k, ky=k))
        return self._spline[1], self._spline[2]

    def evaluate(self, x, y, k: int = 3) -> np.ndarray:
        """G(x, y) at arbitrary points (zero outside the support disk)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = x * x + y * y <= self.radius ** 2
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        if not np.any(inside):
            return out
        xi, yi = np.broadcast_to(x, out.shape)[inside], np.broadcast_to(y, out.shape)[inside]
        if self.exact is not None:
            out[inside] = self.exact(xi, yi)
        else:
            sr, si = self._splines(k)
            out[inside] = sr.ev(xi, yi) + 1j * si.ev(xi, yi)
        return out

    def interpolation_error(self, k: int = 3) -> float:
        """Relative error estimate: a half-resolution spline checked on the skipped nodes."""
        x = self.x1d
        v = self.values
        coarse = v[::2, ::2]
        xc = x[::2]
        sr = RectBivariateSpline(xc, xc, coarse.real, kx=k, ky=k)
        si = RectBivariateSpline(xc, xc, coarse.imag, kx=k, ky=k)
        xf = x[1::2]
        est = sr(xf, xf) + 1j * si(xf, xf)
        scale = max(float(np.max(np.abs(v))), 1e-300)
        # error at full resolution is smaller by 2^(k+1)
        return float(np.max(np.abs(est - v[1::2, 1::2]))) / scale / 2 ** (k + 1)

    def at_time(self, t: float, x, y, k: int = 3) -> np.ndarray:
        """g(t, x) = t^d G(x / t)."""
        return t ** self.degree * self.evaluate(np.asarray(x) / t, np.asarray(y) / t, k)


def rho_slice(x, y) -> np.ndarray:
    r2 = x * x + y * y
    return np.sqrt(np.clip(1.0 - r2, 0.0, None))


def _fd(values: np.ndarray, h: float, stencil: np.ndarray, axis: int) -> np.ndarray:
    pad = [(0, 0), (0, 0)]
    pad[axis] = (3, 3)
    v = np.pad(values, pad)
    n = values.shape[axis]
    out = np.zeros_like(values)
    for i, c in enumerate(stencil):
        if c == 0:
            continue
        sl = [slice(None), slice(None)]
        sl[axis] = slice(i, i + n)
        out = out + c * v[tuple(sl)]
    return out


def slice_gradient(s: ConeSlice):
    return _fd(s.values, s.h, _D1, 0) / s.h, _fd(s.values, s.h, _D1, 1) / s.h


def slice_laplacian(s: ConeSlice) -> np.ndarray:
    return (_fd(s.values, s.h, _D2, 0) + _fd(s.values, s.h, _D2, 1)) / s.h ** 2


def slice_dt(s: ConeSlice) -> ConeSlice:
    """t = 1 slice of the time derivative: (d - x.grad) G, degree d - 1."""
    x, y = s.xy()
    gx, gy = slice_gradient(s)
    vals = (s.degree * s.values - x * gx - y * gy) * s.disk()
    return s.like(vals, s.degree - 1)


def slice_box(s: ConeSlice) -> ConeSlice:
    """t = 1 slice of (d_t^2 - Laplacian) g, degree d - 2."""
    dd = slice_dt(slice_dt(s))
    return s.like((dd.values - slice_laplacian(s)) * s.disk(), s.degree - 2)


def _rho_box_step(s: ConeSlice, index: int) -> ConeSlice:
    """(rho / (2 i eps index M)) box s."""
    x, y = s.xy()
    b = slice_box(s)
    return s.like(rho_slice(x, y) * b.values / (2j * s.sign * index * s.mass), s.degree - 1)


def g0_from_profile(f, M: float, eps: int, R: float = 0.95, n_s: int = 801, band: float | None = None
                    ) -> ConeSlice:
    """g_0(1, x) = i eps M f_hat(-eps M x / rho) / rho^2, degree -1."""
    if eps not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    K = band_of(f, band)
    edge = K / np.hypot(K, M)
    if edge >= R:
        raise SupportOverflow(f"profile band {K:.3g} needs support radius > {edge:.4f}, have {R}")

    def exact(x, y):
        rho = rho_slice(x, y)
        return 1j * eps * M / rho ** 2 * f(-eps * M * x / rho, -eps * M * y / rho)

    s = ConeSlice(np.zeros((n_s, n_s), dtype=complex), R, -1, M, eps)
    x, y = s.xy()
    inside = s.disk()
    vals = np.zeros((n_s, n_s), dtype=complex)
    vals[inside] = exact(x[inside], y[inside])
    return s.like(vals, -1, exact)


def cone_expansion(f, M: float, eps: int, n_terms: int, R: float = 0.95, n_s: int = 801,
                   band: float | None = None) -> list:
    """[g_0, ..., g_{n_terms}] with g_l = (rho / 2 i eps l M) box g_{l-1}."""
    if not 0 <= n_terms <= 3:
        raise ValueError("n_terms must be between 0 and 3")
    out = [g0_from_profile(f, M, eps, R, n_s, band)]
    for l in range(1, n_terms + 1):
        out.append(_rho_box_step(out[-1], l))
    return out


def _cone_values(slices, grid: Grid, t: float, M: float, eps: int) -> np.ndarray:
    x, y = grid.xvec
    total = np.zeros(grid.shape, dtype=complex)
    for s in slices:
        total += s.at_time(t, x, y)
    r2 = x * x + y * y
    rho = np.sqrt(np.clip(t * t - r2, 0.0, None))
    return np.exp(1j * eps * M * rho) * total * (r2 < t * t)


def check_cone_fits(grid: Grid, radius: float, t_max: float, margin: float = 0.0):
    if radius * t_max + margin > grid.length / 2:
        raise SupportOverflow(f"cone section of radius {radius * t_max:.1f} exceeds the half box {grid.length / 2}")


def rest_term_norms(f, M: float, eps: int, n: int, t_grid, grid: Grid, R: float = 0.95, n_s: int = 801,
                    band: float | None = None) -> dict:
    """L2 and delta-weighted sup norms of phi_n = phi_0 - e^{i eps M rho} sum_{l<n} g_l."""
    t_grid = np.asarray(t_grid, dtype=float)
    if n < 0:
        raise ValueError("n must be nonnegative")
    check_cone_fits(grid, R, float(t_grid.max()))
    slices = cone_expansion(f, M, eps, n - 1, R, n_s, band) if n >= 1 else []
    kx, ky = grid.kvec
    fhat = f(kx, ky) * grid.nyquist_mask
    w = omega(grid, M)
    x, y = grid.xvec
    weight = 1.0 + np.sqrt(x * x + y * y)
    l2, sup = [], []
    for t in t_grid:
        phi = grid.inverse(np.exp(1j * eps * w * t) * fhat)
        if slices:
            phi = phi - _cone_values(slices, grid, t, M, eps)
        l2.append(grid.l2_norm_values(phi))
        sup.append(float(np.max((t + weight) * np.abs(phi))))
    return {"l2": DecaySeries(t_grid, np.array(l2), f"rest_l2_n{n}"),
            "sup": DecaySeries(t_grid, np.array(sup), f"rest_sup_n{n}")}


# --- weighted norms ---------------------------------------------------------------

def lam_weight(grid: Grid, t: float) -> np.ndarray:
    x, y = grid.xvec
    r = np.sqrt(x * x + y * y)
    return np.where(r <= t, t / (1.0 + t - np.minimum(r, t)), r)


def delta_weight(grid: Grid, t: float) -> np.ndarray:
    x, y = grid.xvec
    return 1.0 + t + np.sqrt(x * x + y * y)


def _xi_fields(fhat: np.ndarray, grid: Grid, M: float, eps: int, t: float, j: int):
    """Spectral data of xi_Y phi and d_mu xi_Y phi for the free solution, |Y| <= j."""
    kx, ky = grid.kvec
    dt = 1j * eps * omega(grid, M)
    c = np.exp(dt * t) * fhat
    x1, x2 = grid.xvec
    inv, fwd = grid.inverse, grid.forward
    d = {"t": dt, "1": 1j * kx, "2": 1j * ky}

    def spatial(coef, sym):
        return inv(sym * coef)

    # each entry: physical values of (xi_Y phi, [d_t, d_1, d_2] xi_Y phi)
    fields = {(): (inv(c), [spatial(c, d[m]) for m in "t12"])}
    if j >= 1:
        for Y in ("P0", "P1", "P2"):
            sym = d["t12"[int(Y[1])]]
            fields[(Y,)] = (spatial(c, sym), [spatial(c, sym * d[m]) for m in "t12"])
        # N_i = x_i d_t + t d_i ; R = x1 d2 - x2 d1
        pt, p1, p2 = (spatial(c, d[m]) for m in "t12")
        second = {(a, b): spatial(c, d[a] * d[b]) for a in "t12" for b in "t12"}
        for i, xi in (("1", x1), ("2", x2)):
            val = xi * pt + t * (p1 if i == "1" else p2)
            dts = xi * second[("t", "t")] + t * second[("t", i)] + (p1 if i == "1" else p2)
            ds = []
            for m in "12":
                extra = pt if m == i else 0.0
                ds.append(xi * second[(m, "t")] + extra + t * second[(m, i)])
            fields[(f"N{i}",)] = (val, [dts] + ds)
        val = x1 * p2 - x2 * p1
        dts = x1 * second[("t", "2")] - x2 * second[("t", "1")]
        d1 = p2 + x1 * second[("1", "2")] - x2 * second[("1", "1")]
        d2 = x1 * second[("2", "2")] - p1 - x2 * second[("2", "1")]
        fields[("R",)] = (val, [dts, d1, d2])
    del fwd
    return fields


def weighted_p_norm(f, M: float, eps: int, t: float, grid: Grid, j: int = 0, k: int = 0, s="2") -> float:
    """p_j^(s) of (1 + lambda(t))^{k/2} xi phi(t) for phi(t) = e^{i eps w_M t} f (j <= 1)."""
    if j not in (0, 1) or k not in (0, 1, 2):
        raise ValueError("supported orders: j <= 1, k <= 2")
    s = str(s)
    if s not in ("2", "inf"):
        raise ValueError("s must be 2 or inf")
    kx, ky = grid.kvec
    fhat = f.coef if isinstance(f, SpectralField) else f(kx, ky) * grid.nyquist_mask
    w = (1.0 + lam_weight(grid, t)) ** (k / 2)

    def norm(v):
        v = w * v
        return grid.l2_norm_values(v) if s == "2" else float(np.max(np.abs(v)))

    total = 0.0
    for Y, (val, ders) in _xi_fields(fhat, grid, M, eps, t, j).items():
        total += M * norm(val) + sum(norm(dv) for dv in ders)
    return total


# --- inverse construction -----------------------------------------------------

def _hyperboloid_eval(g: ConeSlice, grid: Grid, M: float, eps: int, spline_degree: int) -> np.ndarray:
    kx, ky = grid.kvec
    w = omega(grid, M)
    return g.evaluate(-eps * kx / w, -eps * ky / w, spline_degree)


def inverse_construction(g: ConeSlice, M: float, eps: int, n_terms: int, grid: Grid, spline_degree: int = 3,
                         interp_tol: float = 1e-8) -> list:
    """Spectra f_0..f_{n_terms} with f_hat_l(k) = -i eps (M / w^2) g_{l,0}(1, -eps k / w)."""
    if n_terms not in (0, 1, 2):
        raise ValueError("n_terms must be 0, 1 or 2")
    if g.degree != -1:
        raise ValueError("inverse construction needs a slice of degree -1")
    # g_{l,j} slices; g[l][j] with g_{l,0} = - sum_{1<=j<=l} t^j g_{l-j,j} (t = 1 on the slice)
    table = {(0, 0): ConeSlice(g.values, g.radius, -1, M, eps, g.exact)}
    for l in range(0, n_terms + 1):
        if l >= 1:
            acc = np.zeros_like(g.values)
            for jj in range(1, l + 1):
                acc = acc - table[(l - jj, jj)].values
            table[(l, 0)] = g.like(acc, -1)
            table[(l, 0)].mass, table[(l, 0)].sign = M, eps
        for jj in range(1, n_terms - l + 1):
            table[(l, jj)] = _rho_box_step(table[(l, jj - 1)], 1)
    w = omega(grid, M)
    out = []
    for l in range(n_terms + 1):
        s = table[(l, 0)]
        if s.exact is None and np.any(s.values):
            err = s.interpolation_error(spline_degree)
            if err > interp_tol:
                raise InterpolationError(f"slice interpolation error estimate {err:.2e} exceeds {interp_tol:.0e}")
        vals = -1j * eps * (M / w ** 2) * _hyperboloid_eval(s, grid, M, eps, spline_degree)
        out.append(SpectralField(grid, vals * grid.nyquist_mask))
    return out


def inverse_residual(g: ConeSlice, M: float, eps: int, n_terms: int, grid: Grid, t_grid,
                     spline_degree: int = 3, interp_tol: float = 1e-8) -> DecaySeries:
    """L2 norm of u_n(t) = e^{i eps M rho} g(t) - sum_l t^{-l} e^{i eps w t} f_l."""
    t_grid = np.asarray(t_grid, dtype=float)
    check_cone_fits(grid, g.radius, float(t_grid.max()))
    fs = inverse_construction(g, M, eps, n_terms, grid, spline_degree, interp_tol)
    w = omega(grid, M)
    vals = []
    for t in t_grid:
        cone = _cone_values([g], grid, t, M, eps)
        free = sum(t ** (-l) * np.exp(1j * eps * w * t) * fl.coef for l, fl in enumerate(fs))
        vals.append(grid.l2_norm_values(cone - grid.inverse(free)))
    return DecaySeries(t_grid, np.array(vals), f"u_{n_terms}")


# --- resonance ---------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceTriple:
    M: float
    eps: int
    M1: float
    eps1: int
    M2: float
    eps2: int

    def __post_init__(self):
        for s in (self.eps, self.eps1, self.eps2):
            if s not in (1, -1):
                raise ValueError("signs must be +1 or -1")
        if min(self.M, self.M1, self.M2) <= 0:
            raise ValueError("masses must be positive")
        if abs(self.eps * self.M - self.eps1 * self.M1 - self.eps2 * self.M2) > 1e-12 * self.M:
            raise ValueError("not a mass resonance: eps M != eps1 M1 + eps2 M2")

    def phase_defect(self, rho) -> np.ndarray:
        """eps M rho - eps1 M1 rho - eps2 M2 rho on the cone (identically zero)."""
        rho = np.asarray(rho, dtype=float)
        return (self.eps * self.M - self.eps1 * self.M1 - self.eps2 * self.M2) * rho


def resonant_f0(rt: ResonanceTriple, f1, f2, grid: Grid) -> SpectralField:
    """Leading coefficient f_0 of the resonant product, sampled on the grid."""
    kx, ky = grid.kvec
    a1 = rt.eps1 * rt.M1 / (rt.eps * rt.M)
    a2 = rt.eps2 * rt.M2 / (rt.eps * rt.M)
    pref = 1j * rt.eps1 * rt.M1 * rt.eps2 * rt.M2 / (rt.eps * rt.M)
    w = omega(grid, rt.M)
    vals = pref * (w / rt.M) ** 2 * f1(a1 * kx, a1 * ky) * f2(a2 * kx, a2 * ky)
    return SpectralField(grid, vals * grid.nyquist_mask)


def resonant_f1(rt: ResonanceTriple, f1, f2, grid: Grid, R: float = 0.95, n_s: int = 801,
                bands=(None, None), spline_degree: int = 3, interp_tol: float = 1e-8) -> SpectralField:
    """f_1 = f_{0,1} + f_{1,0} assembled from the order-one slice products."""
    c1 = cone_expansion(f1, rt.M1, rt.eps1, 1, R, n_s, bands[0])
    c2 = cone_expansion(f2, rt.M2, rt.eps2, 1, R, n_s, bands[1])
    base = dict(radius=R, degree=-1, mass=rt.M, sign=rt.eps)
    # g_l(1, .) = sum_{l1 + l2 = l} g_{l1}^(1) g_{l2}^(2) (the t^{1+l} factor is 1 on the slice)
    g0 = ConeSlice(c1[0].values * c2[0].values, **base)
    g1 = ConeSlice(c1[0].values * c2[1].values + c1[1].values * c2[0].values, **base)
    f01 = inverse_construction(g0, rt.M, rt.eps, 1, grid, spline_degree, interp_tol)[1]
    f10 = inverse_construction(g1, rt.M, rt.eps, 0, grid, spline_degree, interp_tol)[0]
    return SpectralField(grid, f01.coef + f10.coef)


def delta_residual(rt: ResonanceTriple, f1, f2, n: int, t_grid, grid: Grid, orders=(0,), R: float = 0.95,
                   n_s: int = 801, bands=(None, None), f_terms=None) -> dict:
    """q_bar_N series of delta_n(t) for N in ``orders``."""
    if n not in (0, 1):
        raise ValueError("n must be 0 or 1")
    t_grid = np.asarray(t_grid, dtype=float)
    kx, ky = grid.kvec
    if f_terms is None:
        f_terms = [resonant_f0(rt, f1, f2, grid)]
        if n == 1:
            f_terms.append(resonant_f1(rt, f1, f2, grid, R, n_s, bands))
    h1 = f1(kx, ky) * grid.nyquist_mask
    h2 = f2(kx, ky) * grid.nyquist_mask
    w, w1, w2 = omega(grid, rt.M), omega(grid, rt.M1), omega(grid, rt.M2)
    out = {N: [] for N in orders}
    for t in t_grid:
        prod = dealiased_product_coef(grid, np.exp(1j * rt.eps1 * w1 * t) * h1, np.exp(1j * rt.eps2 * w2 * t) * h2)
        d = np.exp(-1j * rt.eps * w * t) * prod
        for l, fl in enumerate(f_terms[: n + 1]):
            d = d - t ** (-1 - l) * fl.coef
        field_ = SpectralField(grid, d)
        for N in orders:
            out[N].append(q_bar_norm(field_, N))
    return {N: DecaySeries(t_grid, np.array(v), f"qbar{N}") for N, v in out.items()}
