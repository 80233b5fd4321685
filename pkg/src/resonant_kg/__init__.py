"""Long-range scattering for two resonant nonlinear Klein-Gordon systems in 2D."""

from .catalog import AnalyticProfile, ProfileSum, gaussian, hermite_gaussian
from .config import ExperimentConfig, parse_config
from .decay import DecayFit, DecaySeries, fit_decay
from .dynamics import SystemKind, solve, step
from .estimators import ModifiedWaveOperator, PowerLawDecay
from .grid import Grid, SpectralField, make_grid
from .profiles import ScatteringData, approx_solution, profile
from .scattering import integrand_residual, residual_table, wave_operator
from .state import PhaseState, e_norm

__version__ = "0.1.0"

__all__ = [
    "AnalyticProfile", "ProfileSum", "gaussian", "hermite_gaussian", "ExperimentConfig", "parse_config",
    "DecayFit", "DecaySeries", "fit_decay", "SystemKind", "solve", "step", "ModifiedWaveOperator",
    "PowerLawDecay", "Grid", "SpectralField", "make_grid", "ScatteringData", "approx_solution", "profile",
    "integrand_residual", "residual_table", "wave_operator", "PhaseState", "e_norm",
]
