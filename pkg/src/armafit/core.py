"""
Shared domain types, the fit-failure taxonomy and seeded random streams.

All value types are frozen dataclasses holding read-only numpy arrays, so
they can be passed between threads or processes without copying concerns.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np


class ArmaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ArmaError, ValueError):
    """An argument lies outside the domain of a transformation."""


class NonCausalError(DomainError):
    """AR coefficients do not define a causal polynomial."""


class NonInvertibleError(DomainError):
    """MA coefficients do not define an invertible polynomial."""


class KalmanError(ArmaError):
    """The Kalman recursions broke down (singular init, non-positive variance, NaN)."""


class DegenerateDenominator(ArmaError, ZeroDivisionError):
    """The in-sample naive error used for scaling is zero."""


class AllZeroDifferences(ArmaError, ValueError):
    """Every paired difference handed to a signed-rank test is zero."""


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArmaOrder:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"orders must be non-negative, got ({self.p}, {self.q})")

    @property
    def n_params(self) -> int:
        """Length of the decision vector (AR block, MA block, log-variance)."""
        return self.p + self.q + 1

    def __str__(self) -> str:
        return f"ARMA({self.p},{self.q})"


@dataclass(frozen=True)
class TimeSeries:
    """Observed values with an optional train/test split.

    ``train_len`` counts the leading observations used for fitting; whatever
    follows is the test portion.
    """

    values: np.ndarray
    train_len: Optional[int] = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.size == 0:
            raise ValueError("empty time series")
        if not np.all(np.isfinite(values)):
            raise ValueError("time series contains non-finite values")
        object.__setattr__(self, "values", values)
        n = values.size if self.train_len is None else int(self.train_len)
        if not 1 <= n <= values.size:
            raise ValueError(f"train_len={n} outside [1, {values.size}]")
        object.__setattr__(self, "train_len", n)

    def __len__(self) -> int:
        return self.values.size

    @property
    def train(self) -> np.ndarray:
        return self.values[: self.train_len]

    @property
    def test(self) -> np.ndarray:
        return self.values[self.train_len:]

    def with_holdout(self, holdout: int) -> "TimeSeries":
        if holdout < 0 or holdout >= self.values.size:
            raise ValueError(f"holdout {holdout} incompatible with length {self.values.size}")
        return TimeSeries(self.values, self.values.size - holdout)


@dataclass(frozen=True)
class ArmaCoeffs:
    """Coefficients of ``Y_t - sum phi_i Y_{t-i} = eps_t + sum theta_j eps_{t-j}``."""

    phi: np.ndarray
    theta: np.ndarray
    sigma2: float

    def __post_init__(self):
        object.__setattr__(self, "phi", _frozen(self.phi))
        object.__setattr__(self, "theta", _frozen(self.theta))
        sigma2 = float(self.sigma2)
        if not sigma2 > 0 or not np.isfinite(sigma2):
            raise ValueError(f"sigma2 must be positive and finite, got {sigma2}")
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def order(self) -> ArmaOrder:
        return ArmaOrder(self.phi.size, self.theta.size)


@dataclass(frozen=True)
class PacfCoeffs:
    """Partial autocorrelations ``rho`` and partial MA coefficients ``b``."""

    rho: np.ndarray
    b: np.ndarray
    sigma2: float

    def __post_init__(self):
        rho, b = _frozen(self.rho), _frozen(self.b)
        for name, arr in (("rho", rho), ("b", b)):
            if arr.size and not np.all(np.abs(arr) < 1.0):
                raise DomainError(f"{name} entries must lie in (-1, 1): {arr}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "b", b)
        sigma2 = float(self.sigma2)
        if not sigma2 > 0 or not np.isfinite(sigma2):
            raise ValueError(f"sigma2 must be positive and finite, got {sigma2}")
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def order(self) -> ArmaOrder:
        return ArmaOrder(self.rho.size, self.b.size)

    @property
    def ar_sup(self) -> float:
        return float(np.max(np.abs(self.rho))) if self.rho.size else 0.0

    @property
    def ma_sup(self) -> float:
        return float(np.max(np.abs(self.b))) if self.b.size else 0.0


class BoundaryTag(str, enum.Enum):
    STRICTLY_FEASIBLE = "StrictlyFeasible"
    NEAR_AR = "NearAR"
    NEAR_MA = "NearMA"
    NEAR_BOTH = "NearBoth"

    @property
    def label(self) -> str:
        """Short label used in report tables."""
        return _TAG_LABELS[self]


_TAG_LABELS = {
    BoundaryTag.STRICTLY_FEASIBLE: "strictly feasible",
    BoundaryTag.NEAR_AR: "(i)",
    BoundaryTag.NEAR_MA: "(ii)",
    BoundaryTag.NEAR_BOTH: "(iii)",
}


@dataclass(frozen=True)
class BoundaryClass:
    tag: BoundaryTag
    tau: float

    @property
    def near_border(self) -> bool:
        return self.tag is not BoundaryTag.STRICTLY_FEASIBLE


class FailureKind(str, enum.Enum):
    ARITHMETIC = "ArithmeticIssue"
    KALMAN = "KalmanError"


@dataclass(frozen=True)
class FitFailure:
    """Why a fit stopped early and where, in PACF coordinates.

    ``location`` is None only when the failing point could not be mapped
    back to PACF space (e.g. a NaN produced by an overflowing transform);
    ``raw_point`` then keeps the decision vector that was being evaluated.
    """

    kind: FailureKind
    detail: str
    location: Optional[PacfCoeffs] = None
    raw_point: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FitResult:
    params: Optional[ArmaCoeffs]
    pacf: Optional[PacfCoeffs]
    loglik: float
    n_obj_evals: int
    n_iters: int
    wall_time: float
    failure: Optional[FitFailure] = None
    boundary: Optional[BoundaryClass] = None
    start: Optional[PacfCoeffs] = None
    converged: bool = False
    objective: float = float("nan")

    @property
    def ok(self) -> bool:
        return self.failure is None


# Named stream domains keep simulation, start sampling etc. statistically
# independent even when they share a user seed and series index.
STREAM_DOMAINS = {
    "truth": 0,
    "simulate": 1,
    "starts": 2,
    "forecast_starts": 3,
    "misc": 4,
}


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic PCG64 generator for ``seed`` and an optional key path.

    ``rng_stream(seed)`` is the root stream. Extra integer keys select an
    independent substream through numpy's ``SeedSequence`` spawn keys, e.g.
    ``rng_stream(seed, STREAM_DOMAINS["starts"], series_index)``.
    """
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    keys = tuple(int(k) for k in keys)
    if any(k < 0 for k in keys):
        raise ValueError("substream keys must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=keys)))


def substream(seed: int, domain: str, *keys: int) -> np.random.Generator:
    return rng_stream(seed, STREAM_DOMAINS[domain], *keys)
