"""CVaR-based Pickands estimation of the extreme value index.

Estimators, closed-form asymptotic variances, second-order bias terms, GEV/GPD
tail models and a deterministic Monte Carlo harness.
"""
from .asymptotics import (
    cov_kernel,
    cvar_pickands_av,
    g_factor,
    h_gamma,
    h_tilde_gamma,
    pickands_reference_av,
    yun_av,
)
from .distributions import SampleBatch, TailModel, sample
from .estimators import (
    CVaRPickandsEstimator,
    PickandsEstimator,
    SpacingSpec,
    YunEstimator,
    cvar_order_stats,
    cvar_pickands_estimate,
    pickands_estimate,
    top_k_descending,
    yun_estimate,
)
from .exceptions import (
    ConfigError,
    DataError,
    DegenerateSampleError,
    DomainError,
    EvtCvarError,
    NumericError,
)
from .second_order import SecondOrderSpec, big_H, big_H_tilde, bias_b

__version__ = "0.1.0"

__all__ = [
    "CVaRPickandsEstimator",
    "ConfigError",
    "DataError",
    "DegenerateSampleError",
    "DomainError",
    "EvtCvarError",
    "NumericError",
    "PickandsEstimator",
    "SampleBatch",
    "SecondOrderSpec",
    "SpacingSpec",
    "TailModel",
    "YunEstimator",
    "big_H",
    "big_H_tilde",
    "bias_b",
    "cov_kernel",
    "cvar_order_stats",
    "cvar_pickands_av",
    "cvar_pickands_estimate",
    "g_factor",
    "h_gamma",
    "h_tilde_gamma",
    "pickands_estimate",
    "pickands_reference_av",
    "sample",
    "top_k_descending",
    "yun_av",
    "yun_estimate",
]
