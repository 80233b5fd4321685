import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from resonant_kg.catalog import gaussian
from resonant_kg.decay import DecaySeries, InsufficientSamples, fit_decay
from resonant_kg.estimators import ModifiedWaveOperator, PowerLawDecay
from resonant_kg.grid import make_grid
from resonant_kg.profiles import ScatteringData
from resonant_kg.scattering import AdmissibilityError, wave_operator


T = np.linspace(10, 200, 20)


def test_exact_power_law():
    fit = fit_decay(DecaySeries(T, 3.0 * T ** -1.25), "power")
    assert fit.exponent == pytest.approx(-1.25, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert np.allclose(fit.predict(T), 3.0 * T ** -1.25)


def test_exact_log_growth():
    fit = fit_decay(DecaySeries(T, 0.5 + 0.02 * np.log(T)), "log")
    assert fit.exponent == pytest.approx(0.02, abs=1e-12)
    assert fit.intercept == pytest.approx(0.5, abs=1e-12)


def test_noisy_power_law(rng):
    for _ in range(20):
        y = T ** -2.0 * (1 + 0.01 * rng.uniform(-1, 1, T.size))
        assert abs(fit_decay(DecaySeries(T, y)).exponent + 2.0) < 0.05


def test_window_and_sample_count():
    s = DecaySeries(T, T ** -1.0)
    with pytest.raises(InsufficientSamples):
        fit_decay(s, window=(150, 200))
    fit = fit_decay(s, window=(50, 200), min_samples=5)
    assert fit.window == (50, 200) and fit.n_samples == 16
    with pytest.raises(ValueError):
        fit_decay(s, window=(0, 10))
    with pytest.raises(ValueError):
        fit_decay(s, model="exp")


def test_series_validation():
    with pytest.raises(ValueError):
        DecaySeries([1, 2], [1.0])
    with pytest.raises(ValueError):
        DecaySeries([2, 1], [1.0, 1.0])
    with pytest.raises(ValueError):
        DecaySeries([1, 2], [1.0, -1.0])
    assert DecaySeries([1.0], [2.0], "q").to_csv().splitlines() == ["t,q", "1.0,2.0"]


def test_power_law_estimator_api():
    est = PowerLawDecay(window=(20, 200))
    assert est.get_params() == {"model": "power", "window": (20, 200), "min_samples": 10}
    with pytest.raises(NotFittedError):
        est.predict(T)
    y = 2.0 * T ** -0.9
    est.fit(T[::-1, None], y[::-1])
    assert est.exponent_ == pytest.approx(-0.9)
    assert est.score(T, y) == pytest.approx(est.r2_)
    c = clone(est).set_params(model="log")
    assert c.model == "log" and not hasattr(c, "fit_")
    with pytest.raises(ValueError):
        est.fit(np.ones((20, 2)), y)


def test_wave_operator_estimator():
    g = make_grid(32, 24.0)
    d = ScatteringData.from_profiles(g, 1.0, gaussian(0.2, 0.9), gaussian(0.1, 0.9))
    est = ModifiedWaveOperator(kind="B", t_max=8.0, dt=0.5, n_doublings=1, min_t_max=0.0)
    with pytest.raises(NotFittedError):
        est.transform(d)
    est.fit(d)
    ref = wave_operator("B", d, 8.0, 0.5, 1, min_t_max=0.0)
    assert np.array_equal(est.transform(d).coef, ref.a0.coef)
    assert est.convergence_table_ == ref.convergence_table
    other = d.shifted((1.0, 0.0))
    out = est.transform([d, other])
    assert len(out) == 2 and np.array_equal(out[0].coef, ref.a0.coef)
    tab = est.residuals([2.0, 4.0])
    assert tab.res_modified.shape == (2,)
    big = ScatteringData.from_profiles(g, 0.5, gaussian(0.1, 0.9), gaussian(3.0, 0.9))
    with pytest.raises(AdmissibilityError):
        clone(est).fit(big)
