"""Decay-law fits, closed-form rates, regime classification and ensembles."""

from .ensemble import EnsembleStats, RunningMoments, realization_params, realization_seed, run_ensemble
from .fits import (
    FitResult,
    fit_damped_cosine,
    fit_exponential,
    fit_sinc,
    fluctuation_amplitude,
)
from .rates import crossover_time, fgr_rate, gamma_closed_form
from .regimes import THRESHOLDS, Case, RegimeReport, classify_regime

__all__ = [
    "THRESHOLDS",
    "Case",
    "EnsembleStats",
    "FitResult",
    "RegimeReport",
    "RunningMoments",
    "classify_regime",
    "crossover_time",
    "fgr_rate",
    "fit_damped_cosine",
    "fit_exponential",
    "fit_sinc",
    "fluctuation_amplitude",
    "gamma_closed_form",
    "realization_params",
    "realization_seed",
    "run_ensemble",
]
