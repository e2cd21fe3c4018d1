"""Closeness-to-boundary classification and scaled forecast errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoundaryClass, BoundaryTag, DegenerateDenominator, PacfCoeffs


def classify_boundary(pacf: PacfCoeffs, tau: float) -> BoundaryClass:
    """Tag a feasible point by how close it is to the causal/invertible border.

    The AR side is near the border when ``1 - max|rho| < tau``, the MA side
    when ``1 - max|b| < tau``. A side with order zero is never near.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    near_ar = pacf.rho.size > 0 and 1.0 - pacf.ar_sup < tau
    near_ma = pacf.b.size > 0 and 1.0 - pacf.ma_sup < tau
    if near_ar and near_ma:
        tag = BoundaryTag.NEAR_BOTH
    elif near_ar:
        tag = BoundaryTag.NEAR_AR
    elif near_ma:
        tag = BoundaryTag.NEAR_MA
    else:
        tag = BoundaryTag.STRICTLY_FEASIBLE
    return BoundaryClass(tag, float(tau))


def naive_scale(train) -> float:
    """Mean absolute one-step change of the training series."""
    train = np.asarray(train, dtype=float)
    if train.size < 2:
        raise ValueError("need at least two training observations")
    scale = float(np.mean(np.abs(np.diff(train))))
    if scale == 0.0:
        raise DegenerateDenominator("training series is constant")
    return scale


def _check(actual, forecast):
    actual = np.asarray(actual, dtype=float).reshape(-1)
    forecast = np.asarray(forecast, dtype=float).reshape(-1)
    if actual.shape != forecast.shape or actual.size == 0:
        raise ValueError("actual and forecast must be non-empty and of equal length")
    return actual, forecast


def mase(train, actual, forecast) -> float:
    """Mean absolute error over the horizon, scaled by ``naive_scale(train)``."""
    actual, forecast = _check(actual, forecast)
    return float(np.mean(np.abs(actual - forecast)) / naive_scale(train))


def scaled_error(train, actual, forecast, h: int) -> float:
    """Absolute error at horizon ``h`` (1-based), scaled by ``naive_scale``."""
    actual, forecast = _check(actual, forecast)
    if not 1 <= h <= actual.size:
        raise ValueError(f"horizon {h} outside 1..{actual.size}")
    return float(abs(actual[h - 1] - forecast[h - 1]) / naive_scale(train))


@dataclass(frozen=True)
class ForecastScore:
    mase_h: float
    scaled_errors: np.ndarray

    @property
    def horizon(self) -> int:
        return self.scaled_errors.size


def score_forecast(train, actual, forecast) -> ForecastScore:
    actual, forecast = _check(actual, forecast)
    scale = naive_scale(train)
    errs = np.abs(actual - forecast) / scale
    return ForecastScore(float(np.mean(np.abs(actual - forecast)) / scale), errs)
