"""scikit-learn style wrappers: a decay-law regressor and the wave operator as a transformer."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .decay import DecaySeries, fit_decay
from .dynamics import as_kind
from .profiles import ScatteringData, _as_data
from .scattering import check_admissible, residual_table, wave_operator


class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Fit ``v ~ c t^p`` (``model="power"``) or ``v ~ a + b ln t`` (``"log"``).

    ``X`` holds times (shape ``(n,)`` or ``(n, 1)``), ``y`` the norm samples.
    """

    def __init__(self, model: str = "power", window=None, min_samples: int = 10):
        self.model = model
        self.window = window
        self.min_samples = min_samples

    @staticmethod
    def _times(X) -> np.ndarray:
        t = np.asarray(X, dtype=float)
        if t.ndim == 2:
            if t.shape[1] != 1:
                raise ValueError("X must have a single column of times")
            t = t[:, 0]
        if t.ndim != 1:
            raise ValueError("X must be 1-d or a single column")
        return t

    def fit(self, X, y):
        t = self._times(X)
        y = np.asarray(y, dtype=float)
        order = np.argsort(t)
        fit = fit_decay(DecaySeries(t[order], y[order]), self.model, self.window, self.min_samples)
        self.fit_ = fit
        self.exponent_ = fit.exponent
        self.intercept_ = fit.intercept
        self.r2_ = fit.r2
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        return self.fit_.predict(self._times(X))

    def score(self, X, y, sample_weight=None):
        # in the fitted (log) space, so that r2_ and score agree on the fit data
        check_is_fitted(self, "fit_")
        t = self._times(X)
        y = np.asarray(y, dtype=float)
        pred = self.predict(t)
        if self.model == "power":
            y, pred = np.log(y), np.log(pred)
        ss = float(np.sum((y - pred) ** 2))
        tot = float(np.sum((y - y.mean()) ** 2))
        return 1.0 - ss / tot if tot > 0 else 1.0


class ModifiedWaveOperator(TransformerMixin, BaseEstimator):
    """Omega_+ as a transformer on scattering data.

    ``fit`` checks the datum against the kind (small-data region for kind B) and
    stores the convergence table; ``transform`` returns the initial state
    ``Omega_+(f)`` for each datum.
    """

    def __init__(self, kind: str = "A", t_max: float = 50.0, dt: float = 0.05, n_doublings: int = 1,
                 min_t_max: float = 50.0):
        self.kind = kind
        self.t_max = t_max
        self.dt = dt
        self.n_doublings = n_doublings
        self.min_t_max = min_t_max

    @staticmethod
    def _batch(X):
        if isinstance(X, (list, tuple)):
            return [_as_data(x) for x in X], True
        return [_as_data(X)], False

    def _run(self, data: ScatteringData):
        return wave_operator(as_kind(self.kind, data.mass), data, self.t_max, self.dt, self.n_doublings,
                             self.min_t_max)

    def fit(self, X, y=None):
        batch, _ = self._batch(X)
        for d in batch:
            check_admissible(as_kind(self.kind, d.mass), d)
        res = self._run(batch[0])
        self.result_ = res
        self.omega_ = res.a0
        self.convergence_table_ = res.convergence_table
        self.data_ = batch[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "omega_")
        batch, many = self._batch(X)
        out = [self.omega_ if d is self.data_ else self._run(d).a0 for d in batch]
        return out if many else out[0]

    def residuals(self, t_grid, dt: float | None = None):
        """Forward residual table from the fitted ``Omega_+(f)``."""
        check_is_fitted(self, "omega_")
        return residual_table(as_kind(self.kind, self.data_.mass), self.data_, self.omega_, t_grid,
                              self.dt if dt is None else dt)
