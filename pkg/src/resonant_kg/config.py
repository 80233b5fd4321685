"""Experiment configuration: strict JSON parsing, defaults and validation."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

from .catalog import ProfileSum, from_entry
from .grid import make_grid
from .validation import LocalityError, check_locality

EXPERIMENTS = ("cauchy", "scatter", "resonance", "poincare", "asymptotics")
ASYMPTOTIC_MODES = ("cone", "inverse", "resonance")
SCHEMA_VERSION = "1.0"

DEFAULTS = {
    "kind": "A",
    "mass": 1.0,
    "grid": {"n": 128, "L": 64.0},
    "data": {"f1": [], "f2": []},
    "time": {"t_max": 200.0, "dt": 0.05, "sample_dt": 10.0, "fit_window": None, "t_min": None,
             "horizon": 50.0, "n_doublings": 1},
    "output": {"dir": "out"},
    "options": {},
    "thresholds": {},
}

OPTION_DEFAULTS = {
    "cauchy": {"nonlinear": True, "order_check": False, "q_order": 2},
    "scatter": {"max_growth": 1.1},
    "resonance": {"part": "resonant", "orders": [0, 1, 2]},
    "poincare": {"linear_only": False, "intertwine": False, "shift": [0.5, 0.0], "time_shift": 0.5,
                 "intertwine_t_max": 200.0},
    "asymptotics": {"mode": "cone", "M": 1.0, "eps": 1, "R": 0.95, "n_s": 801, "orders": [1, 2],
                    "triple": {"M": 2.0, "eps": 1, "M1": 1.0, "eps1": 1, "M2": 1.0, "eps2": 1}},
}

THRESHOLD_DEFAULTS = {
    "cauchy": {"drift_per_time_max": 1e-10, "free_energy_rel_max": 1e-12, "order_min": 3.8},
    "scatter": {"A": {"modified_exponent_max": -0.8, "free_log_slope_min": 0.0, "free_log_r2_min": 0.99,
                      "convergence_ratio_min": 1.5},
                "B": {"modified_exponent_max": -0.3, "gamma_max": 0.3, "convergence_ratio_min": 1.5}},
    "resonance": {"A": {"qbar0_exponent_max": -1.8}, "B": {"qbar0_exponent_max": -1.5, "gamma_max": 0.3}},
    "poincare": {"jacobi_max": 1e-12, "linear_max": 1e-8, "nonlinear_max": 1e-6, "intertwine_max": 1e-4},
    "asymptotics": {"cone": {"rest_exponent_max_1": -0.8, "rest_exponent_max_2": -1.8},
                    "inverse": {"roundtrip_max": 1e-6, "u_exponent_max": -0.8},
                    "resonance": {"delta_exponent_max_0": -1.8, "delta_exponent_max_1": -2.7}},
}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class ExperimentConfig:
    experiment: str
    kind: str
    mass: float
    n: int
    L: float
    data: dict
    time: dict
    output_dir: str
    options: dict
    thresholds: dict
    raw: dict = field(default_factory=dict)

    @property
    def grid(self):
        return make_grid(self.n, self.L)

    def profile(self, name: str):
        entries = self.data.get(name) or []
        if not entries:
            return None
        profs = tuple(from_entry(e) for e in entries)
        return profs[0] if len(profs) == 1 else ProfileSum(profs)

    @property
    def fit_window(self) -> tuple[float, float]:
        return tuple(self.time["fit_window"])


def _merge(base: dict, extra: dict, path: str, strict: bool) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        p = f"{path}.{k}" if path else k
        if k not in base:
            if strict:
                raise ConfigError(p, "unknown key")
            out[k] = v
        elif isinstance(base[k], dict) and base[k]:
            if not isinstance(v, dict):
                raise ConfigError(p, "expected an object")
            out[k] = _merge(base[k], v, p, strict)
        else:
            out[k] = v
    return out


def _set_path(d: dict, dotted: str, value):
    keys = dotted.split(".")
    cur = d
    for k in keys[:-1]:
        nxt = cur.get(k)
        if nxt is None:
            nxt = cur[k] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(dotted, f"{k} is not an object")
        cur = nxt
    cur[keys[-1]] = value


def apply_overrides(raw: dict, overrides) -> dict:
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        _set_path(raw, key.strip(), value)
    return raw


def _number(value, path: str, positive: bool = True, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, "expected an integer")
    if positive and value <= 0:
        raise ConfigError(path, "must be positive")
    return int(value) if integer else float(value)


def parse_config(text, overrides=None, strict: bool = True) -> ExperimentConfig:
    """Parse JSON text (or an already-decoded dict) into a validated config."""
    if isinstance(text, dict):
        raw = copy.deepcopy(text)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object")
    raw = apply_overrides(raw, overrides)
    strict = bool(raw.pop("strict", strict))
    exp = raw.pop("experiment", None)
    if exp not in EXPERIMENTS:
        raise ConfigError("experiment", f"must be one of {EXPERIMENTS}, got {exp!r}")

    base = copy.deepcopy(DEFAULTS)
    base["options"] = copy.deepcopy(OPTION_DEFAULTS[exp])
    cfg = _merge(base, raw, "", strict)

    kind = cfg["kind"]
    if kind not in ("A", "B"):
        raise ConfigError("kind", "must be 'A' or 'B'")
    mass = _number(cfg["mass"], "mass")
    n = _number(cfg["grid"]["n"], "grid.n", integer=True)
    if n % 2 or n < 16:
        raise ConfigError("grid.n", "must be an even integer >= 16")
    L = _number(cfg["grid"]["L"], "grid.L")

    tm = cfg["time"]
    tm["t_max"] = _number(tm["t_max"], "time.t_max")
    tm["dt"] = _number(tm["dt"], "time.dt")
    tm["sample_dt"] = _number(tm["sample_dt"], "time.sample_dt")
    tm["horizon"] = _number(tm["horizon"], "time.horizon")
    tm["n_doublings"] = _number(tm["n_doublings"], "time.n_doublings", positive=False, integer=True)
    if tm["fit_window"] is None:
        lo = tm["t_min"] if tm["t_min"] is not None else min(20.0, tm["t_max"] / 10)
        tm["fit_window"] = [float(lo), tm["t_max"]]
    fw = tm["fit_window"]
    if not isinstance(fw, (list, tuple)) or len(fw) != 2:
        raise ConfigError("time.fit_window", "must be [lo, hi]")
    lo, hi = (_number(v, "time.fit_window") for v in fw)
    if not lo < hi:
        raise ConfigError("time.fit_window", "needs lo < hi")
    if hi > tm["t_max"] * (1 + 1e-12):
        raise ConfigError("time.fit_window", f"upper end {hi} exceeds t_max {tm['t_max']}")
    tm["fit_window"] = [lo, hi]
    if tm["t_min"] is None:
        tm["t_min"] = lo

    opts = cfg["options"]
    if exp == "asymptotics" and opts["mode"] not in ASYMPTOTIC_MODES:
        raise ConfigError("options.mode", f"must be one of {ASYMPTOTIC_MODES}")

    defaults = THRESHOLD_DEFAULTS[exp]
    if exp in ("scatter", "resonance"):
        defaults = defaults[kind]
    elif exp == "asymptotics":
        defaults = defaults[opts["mode"]]
    thresholds = dict(defaults)
    for k, v in (cfg["thresholds"] or {}).items():
        if strict and k not in defaults:
            raise ConfigError(f"thresholds.{k}", "unknown threshold")
        thresholds[k] = _number(v, f"thresholds.{k}", positive=False)
    cfg["thresholds"] = thresholds

    data = cfg["data"]
    for name in ("f1", "f2"):
        entries = data.get(name) or []
        if isinstance(entries, dict):
            entries = [entries]
        data[name] = entries
        for i, e in enumerate(entries):
            p = f"data.{name}[{i}]"
            if not isinstance(e, dict):
                raise ConfigError(p, "catalog entry must be an object")
            try:
                prof = from_entry(e)
            except (ValueError, TypeError) as exc:
                raise ConfigError(p, str(exc)) from None
            if exp != "asymptotics":
                try:
                    check_locality(prof, make_grid(n, L))
                except LocalityError as exc:
                    raise ConfigError(p, str(exc)) from None
                if prof.effective_band(1e-14) > make_grid(n, L).k_nyquist:
                    raise ConfigError(p, "profile band exceeds the grid Nyquist frequency")

    out = ExperimentConfig(exp, kind, mass, n, L, data, tm, str(cfg["output"]["dir"]), opts, thresholds)
    if kind == "B" and exp in ("scatter", "resonance", "poincare") and data["f2"]:
        from .profiles import ScatteringData

        sd = ScatteringData.from_profiles(out.grid, mass, out.profile("f1"), out.profile("f2"))
        gamma = sd.growth_surrogate()
        if not sd.admissible:
            raise ConfigError("data.f2", f"outside the small-data region: measured growth surrogate {gamma:.4g} "
                                         "(need 2 * surrogate < 1)")
    out.raw = {"schema_version": SCHEMA_VERSION, "experiment": exp, **cfg, "strict": strict}
    return out


def load_config(path: str, overrides=None) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("", f"cannot read config: {exc}") from None
    return parse_config(text, overrides)
