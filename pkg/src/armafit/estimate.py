"""
Exact maximum-likelihood fitting of zero-mean ARMA(p, q) models.

Two charts of the same causal/invertible parameter set are supported:

``bounded``
    Decision vector ``(rho, b, log sigma2)`` with ``rho`` and ``b`` kept in
    the box ``[-1 + eps, 1 - eps]``. Optionally penalized by
    ``lam * (|rho|^2 + |b|^2)``.
``jones``
    Decision vector ``(u, w, log sigma2)``, unconstrained in ``u`` and
    ``w``; partial coefficients are recovered through the logistic map.

Both share the Kalman likelihood, finite-difference gradients and the
optimizer, so measured differences come from the chart alone.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .core import (
    ArmaCoeffs,
    ArmaOrder,
    FailureKind,
    FitFailure,
    FitResult,
    KalmanError,
    PacfCoeffs,
)
from .evaluate import classify_boundary
from .optimize import EvaluationFailure, optimize_bounded
from .statespace import loglik_arrays
from .transforms import (
    _forward,
    clipped_levinson_inverse,
    clipped_ma_inverse,
    jones_inverse,
    jones_map,
)

BOUNDED = "bounded"
JONES = "jones"
METHODS = (BOUNDED, JONES)


@dataclass(frozen=True)
class FitConfig:
    epsilon: float = 1e-2
    lam: float = 0.0
    method: str = BOUNDED
    jones_form: str = "stable"
    max_iters: int = 500
    tol: float = 1e-6
    ftol: float = 1e-10
    log_sigma2_bounds: tuple = (-30.0, 30.0)
    tau: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.jones_form not in ("stable", "naive"):
            raise ValueError("jones_form must be 'stable' or 'naive'")

    @property
    def closeness(self) -> float:
        """Boundary-closeness threshold; defaults to twice the box shrink."""
        return 2.0 * self.epsilon if self.tau is None else self.tau


class Objective:
    """Log-likelihood (minus the optional penalty) as a function of a
    decision vector in one of the two charts.

    Calling the object returns a float or raises ``EvaluationFailure``;
    :meth:`evaluate` returns ``(value, failure)`` instead.
    """

    def __init__(self, y, order: ArmaOrder, config: FitConfig, chart: Optional[str] = None):
        self.y = np.ascontiguousarray(y, dtype=float)
        self.order = order
        self.config = config
        self.chart = chart or config.method
        self.n_evals = 0
        p, q = order.p, order.q
        self._p, self._q = p, q
        eps = config.epsilon
        lo_s, hi_s = config.log_sigma2_bounds
        if self.chart == BOUNDED:
            box = 1.0 - eps
            self.lower = np.r_[np.full(p + q, -box), lo_s]
            self.upper = np.r_[np.full(p + q, box), hi_s]
        else:
            self.lower = np.r_[np.full(p + q, -np.inf), lo_s]
            self.upper = np.r_[np.full(p + q, np.inf), hi_s]

    @property
    def dim(self) -> int:
        return self._p + self._q + 1

    def partials(self, x):
        """Partial coefficients (rho, b) encoded by ``x``."""
        p, q = self._p, self._q
        if self.chart == BOUNDED:
            return x[:p], x[p:p + q]
        form = self.config.jones_form
        return jones_map(x[:p], form), jones_map(x[p:p + q], form)

    def to_pacf(self, x) -> PacfCoeffs:
        x = np.asarray(x, dtype=float)
        p, q = self._p, self._q
        if self.chart == BOUNDED:
            rho, b = x[:p], x[p:p + q]
        else:
            rho, b = jones_map(x[:p], "stable"), jones_map(x[p:p + q], "stable")
        return PacfCoeffs(rho, b, math.exp(x[-1]))

    def from_pacf(self, pacf: PacfCoeffs) -> np.ndarray:
        s = math.log(pacf.sigma2)
        if self.chart == BOUNDED:
            return np.r_[pacf.rho, pacf.b, s]
        return np.r_[jones_inverse(pacf.rho), jones_inverse(pacf.b), s]

    def _fail(self, kind: FailureKind, detail: str, x) -> EvaluationFailure:
        x = np.array(x, dtype=float)
        try:
            loc = self.to_pacf(x)
        except (ValueError, OverflowError):
            loc = None
        return EvaluationFailure(FitFailure(kind, detail, loc, x))

    def loglik(self, x) -> float:
        """Unpenalized log-likelihood at ``x``."""
        self.n_evals += 1
        try:
            rho, b = self.partials(x)
        except FloatingPointError as exc:
            raise self._fail(FailureKind.ARITHMETIC, f"logistic map: {exc}", x) from None
        phi = _forward(rho, -1.0)
        theta = _forward(b, 1.0)
        try:
            return loglik_arrays(phi, theta, math.exp(x[-1]), self.y)
        except KalmanError as exc:
            raise self._fail(FailureKind.KALMAN, str(exc), x) from None

    def penalty(self, x) -> float:
        if self.config.lam == 0.0:
            return 0.0
        rho, b = self.partials(x)
        return self.config.lam * (float(rho @ rho) + float(b @ b))

    def __call__(self, x) -> float:
        value = self.loglik(x)
        if self.config.lam:
            value -= self.penalty(x)
        return value

    def evaluate(self, x):
        try:
            return self(np.asarray(x, dtype=float)), None
        except EvaluationFailure as exc:
            return np.nan, exc.failure


def objective_bounded(x, y, order: ArmaOrder, config: Optional[FitConfig] = None) -> float:
    """Unpenalized objective of the bounded chart at ``x = (rho, b, log sigma2)``."""
    config = replace(config or FitConfig(), lam=0.0, method=BOUNDED)
    return Objective(y, order, config)(np.asarray(x, dtype=float))


def objective_regularized(x, y, order: ArmaOrder, lam: float, config: Optional[FitConfig] = None) -> float:
    config = replace(config or FitConfig(), lam=lam, method=BOUNDED)
    return Objective(y, order, config)(np.asarray(x, dtype=float))


def objective_jones(z, y, order: ArmaOrder, config: Optional[FitConfig] = None) -> float:
    """Objective of the Jones chart at ``z = (u, w, log sigma2)``."""
    config = replace(config or FitConfig(), method=JONES)
    return Objective(y, order, config)(np.asarray(z, dtype=float))


def _result(obj: Objective, opt, start: Optional[PacfCoeffs], wall: float, tau: float) -> FitResult:
    x = opt.x
    try:
        pacf = obj.to_pacf(x)
    except ValueError:
        pacf = None
    params = None
    boundary = None
    if pacf is not None:
        params = ArmaCoeffs(_forward(pacf.rho, -1.0), _forward(pacf.b, 1.0), pacf.sigma2)
        boundary = classify_boundary(pacf, tau)
    loglik = np.nan
    if np.isfinite(opt.value):
        loglik = opt.value + obj.penalty(x) if obj.config.lam else opt.value
    return FitResult(
        params=params,
        pacf=pacf,
        loglik=float(loglik),
        n_obj_evals=obj.n_evals,
        n_iters=opt.n_iters,
        wall_time=wall,
        failure=opt.failure,
        boundary=boundary,
        start=start,
        converged=opt.converged,
        objective=float(opt.value),
    )


def fit_from_vector(y, order: ArmaOrder, config: FitConfig, x0, start: Optional[PacfCoeffs] = None) -> FitResult:
    """Optimize from a raw decision vector in the chart of ``config.method``.

    Lets the Jones chart start outside the range reachable by mapping a
    PACF point (e.g. ``|u|`` in the hundreds).
    """
    obj = Objective(y, order, config)
    t0 = time.perf_counter()
    opt = optimize_bounded(
        obj, x0, obj.lower, obj.upper,
        max_iters=config.max_iters, tol=config.tol, ftol=config.ftol,
    )
    wall = time.perf_counter() - t0
    return _result(obj, opt, start, wall, config.closeness)


def fit(y, order: ArmaOrder, config: FitConfig, start: PacfCoeffs) -> FitResult:
    """Fit from a start point given in PACF coordinates.

    The bounded chart uses the start as is (it must lie in the box); the
    Jones chart maps it through the inverse logistic transform.
    """
    if start.order != order:
        raise ValueError(f"start order {start.order} does not match {order}")
    box = 1.0 - config.epsilon
    if config.method == BOUNDED and (start.ar_sup > box or start.ma_sup > box):
        raise ValueError("start point outside the epsilon box")
    obj = Objective(y, order, config)
    return fit_from_vector(y, order, config, obj.from_pacf(start), start)


def draw_starts(order: ArmaOrder, n_starts: int, rng: np.random.Generator, epsilon: float,
                sigma2: float) -> List[PacfCoeffs]:
    """Starting points uniform over the epsilon box; sigma2 is held fixed."""
    box = 1.0 - epsilon
    starts = []
    for _ in range(n_starts):
        rho = rng.uniform(-box, box, size=order.p)
        b = rng.uniform(-box, box, size=order.q)
        starts.append(PacfCoeffs(rho, b, sigma2))
    return starts


def start_variance(y) -> float:
    """Variance used for every start: the series' mean square, or 1 if zero."""
    v = float(np.mean(np.square(y)))
    return v if v > 0 and np.isfinite(v) else 1.0


def multistart_fit(y, order: ArmaOrder, config: FitConfig, n_starts: int = 30,
                   rng: Optional[np.random.Generator] = None,
                   starts: Optional[Sequence[PacfCoeffs]] = None) -> List[FitResult]:
    """Fit from ``n_starts`` random starts (or the given ``starts``), in order.

    Starts are generated before any fitting, so replaying the same ``rng``
    state with a different method reuses the same start set.
    """
    if starts is None:
        if n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if rng is None:
            raise ValueError("either rng or starts is required")
        starts = draw_starts(order, n_starts, rng, config.epsilon, start_variance(y))
    return [fit(y, order, config, s) for s in starts]


def best_fit(results: Sequence[FitResult], tie_tol: float = 1e-9) -> Optional[FitResult]:
    """Highest log-likelihood among successful fits; ties go to the earlier start."""
    best = None
    for r in results:
        if not r.ok or not np.isfinite(r.loglik):
            continue
        if best is None or r.loglik > best.loglik + tie_tol:
            best = r
    return best


def hr_long_ar_order(n: int, order: ArmaOrder) -> int:
    return min(math.ceil(10 * math.log10(n)) + max(order.p, order.q), n // 4)


def _lagged(x: np.ndarray, lags: int, rows: slice) -> np.ndarray:
    idx = np.arange(x.size)[rows]
    return np.column_stack([x[idx - k] for k in range(1, lags + 1)]) if lags else np.empty((idx.size, 0))


def hannan_rissanen(y, order: ArmaOrder, epsilon: float = 1e-2) -> PacfCoeffs:
    """Two-stage least-squares preliminary estimate, returned as a start point.

    Stage one fits a long autoregression to estimate the innovations; stage
    two regresses ``y_t`` on its own lags and the lagged innovation
    estimates. The result is mapped to partial coefficients, each clipped
    into ``[-1 + epsilon, 1 - epsilon]``. Rank-deficient regressions fall
    back to the zero start with the sample variance.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    p, q = order.p, order.q
    if n <= 10 * (p + q):
        raise ValueError(f"series too short for Hannan-Rissanen: n={n}, order {order}")
    box = 1.0 - epsilon
    var = float(np.var(y))
    fallback = PacfCoeffs(np.zeros(p), np.zeros(q), var if var > 0 else 1.0)

    if q > 0:
        m = hr_long_ar_order(n, order)
        if m < 1:
            return fallback
        X = _lagged(y, m, slice(m, None))
        coef, _, rank, _ = np.linalg.lstsq(X, y[m:], rcond=None)
        if rank < m:
            return fallback
        resid = np.zeros(n)
        resid[m:] = y[m:] - X @ coef
        start = m + q
    else:
        resid = np.zeros(n)
        start = p
    start = max(start, p)
    if n - start <= p + q:
        return fallback
    rows = slice(start, None)
    X = np.hstack([_lagged(y, p, rows), _lagged(resid, q, rows)])
    coef, _, rank, _ = np.linalg.lstsq(X, y[start:], rcond=None)
    if rank < p + q or not np.all(np.isfinite(coef)):
        return fallback
    e = y[start:] - X @ coef
    sigma2 = float(np.mean(e * e))
    if not sigma2 > 0 or not np.isfinite(sigma2):
        return fallback
    rho = clipped_levinson_inverse(coef[:p], box)
    b = clipped_ma_inverse(coef[p:], box)
    return PacfCoeffs(rho, b, sigma2)
