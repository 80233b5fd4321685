"""Input checks shared by the estimators, the config parser and the experiments."""

from __future__ import annotations

import warnings

import numpy as np

from .catalog import AnalyticProfile, ProfileSum
from .grid import BandLimitWarning, Grid

LOCALITY_SIGMAS = 10.0


class LocalityError(ValueError):
    pass


def _terms(profile):
    if isinstance(profile, ProfileSum):
        return list(profile.terms)
    return [profile]


def check_locality(profile, grid: Grid, sigmas: float = LOCALITY_SIGMAS):
    """Each Gaussian envelope must sit ``sigmas`` physical widths inside the box."""
    half = grid.length / 2
    for p in _terms(profile):
        if not isinstance(p, AnalyticProfile):
            continue
        reach = max(abs(p.x0[0]), abs(p.x0[1])) + sigmas / p.width
        if reach > half:
            raise LocalityError(f"profile centred at {p.x0} with physical width {1 / p.width:.3g} "
                                f"reaches {reach:.3g} > half box {half:.3g}")


def check_band(profile, grid: Grid, half_band: bool = False, tol: float = 1e-14) -> float:
    """Effective band of ``profile``; raises past Nyquist, warns past half band."""
    K = float(profile.effective_band(tol))
    if K > grid.k_nyquist:
        raise ValueError(f"profile band {K:.3g} exceeds the grid Nyquist frequency {grid.k_nyquist:.3g}")
    if half_band and K > grid.k_nyquist / 2:
        warnings.warn(f"profile band {K:.3g} exceeds half the Nyquist frequency", BandLimitWarning, stacklevel=2)
    return K


def check_profile(profile, grid: Grid, half_band: bool = False):
    check_locality(profile, grid)
    return check_band(profile, grid, half_band)


def check_array(x, shape=None, name: str = "array", dtype=complex) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if shape is not None and arr.shape != tuple(shape):
        raise ValueError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_times(t, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("time grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    if lo is not None and t[0] < lo:
        raise ValueError(f"time grid starts below {lo}")
    if hi is not None and t[-1] > hi:
        raise ValueError(f"time grid ends above {hi}")
    return t


def central_mass_fraction(values: np.ndarray, grid: Grid) -> float:
    """Share of the L2 mass of physical ``values`` (shape (..., n, n)) inside the central half box."""
    x, y = grid.xvec
    inner = (np.abs(x) <= grid.length / 4) & (np.abs(y) <= grid.length / 4)
    w = np.abs(values) ** 2
    total = float(np.sum(w))
    if total == 0:
        return 1.0
    return float(np.sum(w * inner)) / total


def check_central_mass(values: np.ndarray, grid: Grid, tol: float = 1e-10) -> float:
    frac = central_mass_fraction(values, grid)
    if frac < 1.0 - tol:
        raise LocalityError(f"only {frac:.12f} of the field mass lies in the central half box")
    return frac
