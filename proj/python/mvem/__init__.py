"""Particle simulator and convergence laboratory for mean-field SDEs."""

from ._core import (
    Smoothing,
    builtin_defaults,
    builtin_families,
    coupling_upper_bound,
    fit_rate,
    glivenko_sweep,
    oracle_linear_gaussian,
    picard,
    run_cli,
    run_criterion,
    simulate,
    strong_error,
    timestep_sweep,
    chaos_sweep,
    validate_model,
    wasserstein_1d,
    wasserstein_matching,
    wasserstein_sliced,
)

__all__ = [
    "Smoothing",
    "builtin_defaults",
    "builtin_families",
    "chaos_sweep",
    "coupling_upper_bound",
    "fit_rate",
    "glivenko_sweep",
    "oracle_linear_gaussian",
    "picard",
    "run_cli",
    "run_criterion",
    "simulate",
    "strong_error",
    "timestep_sweep",
    "validate_model",
    "wasserstein_1d",
    "wasserstein_matching",
    "wasserstein_sliced",
]
