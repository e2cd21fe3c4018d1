"""
Exact Gaussian maximum likelihood for causal, invertible ARMA(p, q) models
under two parametrizations: the unconstrained logistic (Jones) chart and a
box-constrained partial-autocorrelation chart with optional L2 penalty.
"""
from .core import (
    AllZeroDifferences,
    ArmaCoeffs,
    ArmaError,
    ArmaOrder,
    BoundaryClass,
    BoundaryTag,
    DegenerateDenominator,
    DomainError,
    FailureKind,
    FitFailure,
    FitResult,
    KalmanError,
    NonCausalError,
    NonInvertibleError,
    PacfCoeffs,
    TimeSeries,
)
from .estimate import FitConfig, fit, hannan_rissanen, multistart_fit
from .statespace import kalman_forecast, kalman_loglik
from .transforms import arma_to_pacf, pacf_to_arma

__version__ = "0.1.0"

__all__ = [
    "AllZeroDifferences",
    "ArmaCoeffs",
    "ArmaError",
    "ArmaOrder",
    "BoundaryClass",
    "BoundaryTag",
    "DegenerateDenominator",
    "DomainError",
    "FailureKind",
    "FitConfig",
    "FitFailure",
    "FitResult",
    "KalmanError",
    "NonCausalError",
    "NonInvertibleError",
    "PacfCoeffs",
    "TimeSeries",
    "arma_to_pacf",
    "fit",
    "hannan_rissanen",
    "kalman_forecast",
    "kalman_loglik",
    "multistart_fit",
    "pacf_to_arma",
]
