"""Stochastic reaction-diffusion experiments."""

from ._srde import (
    AssumptionViolation,
    ConfigError,
    IoError,
    RunConfig,
    __version__,
    beta_constant,
    check,
    classify_cell,
    config_keys,
    decay_envelope,
    exact_solution,
    moment_bound,
    sde_moment,
    simulate,
    sweep,
    uniform_bound,
    wilson_interval,
)

__all__ = [
    "AssumptionViolation",
    "ConfigError",
    "IoError",
    "RunConfig",
    "__version__",
    "beta_constant",
    "check",
    "classify_cell",
    "config_keys",
    "decay_envelope",
    "exact_solution",
    "moment_bound",
    "sde_moment",
    "simulate",
    "sweep",
    "uniform_bound",
    "wilson_interval",
]
