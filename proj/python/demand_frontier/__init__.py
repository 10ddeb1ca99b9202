"""Probabilistic household demand forecasting and portfolio construction."""

from ._core import (
    Error,
    FitError,
    InfeasibleError,
    InvalidInput,
    __version__,
    crps,
    decompose,
    fit_arma_garch,
    forecast,
    impute,
    mae,
    objective_sr,
    objective_ss,
    resolve_config,
    run,
    synthesize,
)

__all__ = [
    "Error",
    "FitError",
    "InfeasibleError",
    "InvalidInput",
    "__version__",
    "crps",
    "decompose",
    "fit_arma_garch",
    "forecast",
    "impute",
    "mae",
    "objective_sr",
    "objective_ss",
    "resolve_config",
    "run",
    "synthesize",
]
