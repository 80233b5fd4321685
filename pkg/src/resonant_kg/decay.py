"""Time series of norms and power/log growth fits."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

MODELS = ("power", "log")


@dataclass
class DecaySeries:
    times: np.ndarray
    values: np.ndarray
    norm_tag: str = "e_norm"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("norm samples must be nonnegative")

    def __len__(self):
        return len(self.times)

    def window(self, lo: float, hi: float) -> DecaySeries:
        sel = (self.times >= lo) & (self.times <= hi)
        return DecaySeries(self.times[sel], self.values[sel], self.norm_tag)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", self.norm_tag])
        for t, v in zip(self.times, self.values):
            w.writerow([repr(float(t)), repr(float(v))])
        return buf.getvalue()


@dataclass
class DecayFit:
    """``power``: v ~ c t^exponent.  ``log``: v ~ intercept + exponent * ln t."""

    model: str
    exponent: float
    intercept: float
    r2: float
    window: tuple[float, float]
    n_samples: int = 0
    extra: dict = field(default_factory=dict)

    def predict(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.model == "power":
            return np.exp(self.intercept) * t ** self.exponent
        return self.intercept + self.exponent * np.log(t)

    def as_dict(self) -> dict:
        return {"model": self.model, "exponent": self.exponent, "intercept": self.intercept, "r2": self.r2,
                "window": list(self.window), "n_samples": self.n_samples}


class InsufficientSamples(ValueError):
    pass


def fit_decay(series: DecaySeries, model: str = "power", window=None, min_samples: int = 10) -> DecayFit:
    """Least-squares fit on (ln t, ln v) or (ln t, v) inside ``window``."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if window is None:
        window = (float(series.times[0]), float(series.times[-1]))
    lo, hi = window
    if lo <= 0 or hi <= lo:
        raise ValueError("fit window must satisfy 0 < lo < hi")
    s = series.window(lo, hi)
    if len(s) < min_samples:
        raise InsufficientSamples(f"{len(s)} samples in window {window}, need {min_samples}")
    x = np.log(s.times)
    if model == "power":
        if np.any(s.values <= 0):
            raise ValueError("power-law fit needs positive values")
        y = np.log(s.values)
    else:
        y = s.values
    res = stats.linregress(x, y)
    r2 = float(res.rvalue ** 2) if np.isfinite(res.rvalue) else 1.0
    return DecayFit(model, float(res.slope), float(res.intercept), min(max(r2, 0.0), 1.0), (lo, hi), len(s))
