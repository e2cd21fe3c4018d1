"""
State-space form of a zero-mean ARMA model and its exact Gaussian likelihood.

The representation is Harvey's with state dimension ``r = max(p, q + 1)``::

    alpha_{t+1} = T alpha_t + R eps_{t+1},    y_t = alpha_t[0]

with ``T`` the companion matrix (``phi`` down the first column, ones on the
super-diagonal) and ``R = (1, theta_1, ..., theta_{r-1})``. The filter starts
from the stationary covariance, i.e. the solution of
``P = T P T' + sigma2 R R'``, and accumulates the prediction-error
decomposition of the log-likelihood.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import ArmaCoeffs, KalmanError

LOG_2PI = math.log(2.0 * math.pi)

# innovation variances at or below this are treated as a filter breakdown
MIN_INNOVATION_VAR = 1e-300

# status codes returned by the compiled kernels
OK = 0
SINGULAR_INIT = 1
BAD_INIT = 2
BAD_VARIANCE = 3
NON_FINITE = 4

_STATUS_TEXT = {
    SINGULAR_INIT: "stationary covariance solve is singular",
    BAD_INIT: "stationary covariance is not finite/positive",
    BAD_VARIANCE: "non-positive innovation variance",
    NON_FINITE: "non-finite quantity in Kalman recursion",
}


@dataclass(frozen=True)
class StateSpace:
    T: np.ndarray
    R: np.ndarray
    sigma2: float

    @property
    def dim(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class KalmanDiagnostics:
    loglik: float
    innovation_vars: np.ndarray
    innovations: np.ndarray
    state: np.ndarray
    cov: np.ndarray


def build_state_space(coeffs: ArmaCoeffs) -> StateSpace:
    p, q = coeffs.phi.size, coeffs.theta.size
    r = max(p, q + 1)
    T = np.zeros((r, r))
    T[:p, 0] = coeffs.phi
    T[np.arange(r - 1), np.arange(1, r)] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    R[1:q + 1] = coeffs.theta
    return StateSpace(T, R, coeffs.sigma2)


@numba.njit(cache=True)
def _companion(phi, theta):
    p = phi.shape[0]
    q = theta.shape[0]
    r = max(p, q + 1)
    T = np.zeros((r, r))
    for i in range(p):
        T[i, 0] = phi[i]
    for i in range(r - 1):
        T[i, i + 1] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    for i in range(q):
        R[i + 1] = theta[i]
    return T, R


@numba.njit(cache=True)
def _lyapunov(T, R, sigma2):
    """Solve (I - T kron T) vec(P) = vec(sigma2 R R') by Gaussian elimination
    with partial pivoting. Returns (P, status)."""
    r = T.shape[0]
    m = r * r
    A = np.empty((m, m))
    rhs = np.empty(m)
    for i in range(r):
        for j in range(r):
            row = i * r + j
            rhs[row] = sigma2 * R[i] * R[j]
            for k in range(r):
                for l in range(r):
                    A[row, k * r + l] = -T[i, k] * T[j, l]
            A[row, row] += 1.0
    for c in range(m):
        piv = c
        best = abs(A[c, c])
        for i in range(c + 1, m):
            if abs(A[i, c]) > best:
                best = abs(A[i, c])
                piv = i
        if best == 0.0 or not np.isfinite(best):
            return np.zeros((r, r)), SINGULAR_INIT
        if piv != c:
            for k in range(m):
                tmp = A[c, k]
                A[c, k] = A[piv, k]
                A[piv, k] = tmp
            tmp = rhs[c]
            rhs[c] = rhs[piv]
            rhs[piv] = tmp
        for i in range(c + 1, m):
            f = A[i, c] / A[c, c]
            if f != 0.0:
                for k in range(c, m):
                    A[i, k] -= f * A[c, k]
                rhs[i] -= f * rhs[c]
    x = np.empty(m)
    for i in range(m - 1, -1, -1):
        s = rhs[i]
        for k in range(i + 1, m):
            s -= A[i, k] * x[k]
        x[i] = s / A[i, i]
    P = np.empty((r, r))
    for i in range(r):
        for j in range(r):
            P[i, j] = 0.5 * (x[i * r + j] + x[j * r + i])
    for i in range(r):
        if not np.isfinite(P[i, i]) or P[i, i] < 0.0:
            return P, BAD_INIT
    return P, OK


@numba.njit(cache=True)
def _filter(phi, theta, sigma2, y, keep):
    """Kalman prediction-error recursions.

    Returns (loglik, status, a, P, F, v) where a, P are the one-step-ahead
    predicted state and covariance after the last observation. F and v are
    only filled when ``keep`` is true.
    """
    T, R = _companion(phi, theta)
    r = T.shape[0]
    n = y.shape[0]
    F_out = np.zeros(n if keep else 0)
    v_out = np.zeros(n if keep else 0)
    P, status = _lyapunov(T, R, sigma2)
    a = np.zeros(r)
    if status != OK:
        return np.nan, status, a, P, F_out, v_out
    Q = np.empty((r, r))
    for i in range(r):
        for j in range(r):
            Q[i, j] = sigma2 * R[i] * R[j]
    K = np.empty(r)
    L = np.empty((r, r))
    tmp = np.empty((r, r))
    ll = 0.0
    for t in range(n):
        F = P[0, 0]
        if not np.isfinite(F):
            return np.nan, NON_FINITE, a, P, F_out, v_out
        if F <= MIN_INNOVATION_VAR:
            return np.nan, BAD_VARIANCE, a, P, F_out, v_out
        v = y[t] - a[0]
        if keep:
            F_out[t] = F
            v_out[t] = v
        ll -= 0.5 * (LOG_2PI + math.log(F) + v * v / F)
        for i in range(r):
            K[i] = P[i, 0] / F
            a[i] += K[i] * v
        # Joseph form with zero measurement noise: (I - K Z) P (I - K Z)'
        for i in range(r):
            for j in range(r):
                L[i, j] = -K[i] if j == 0 else 0.0
            L[i, i] += 1.0
        for i in range(r):
            for j in range(r):
                s = 0.0
                for k in range(r):
                    s += L[i, k] * P[k, j]
                tmp[i, j] = s
        for i in range(r):
            for j in range(r):
                s = 0.0
                for k in range(r):
                    s += tmp[i, k] * L[j, k]
                P[i, j] = s
        # predict: a <- T a, P <- T P T' + Q
        a_new = np.zeros(r)
        for i in range(r):
            s = T[i, 0] * a[0]
            if i + 1 < r:
                s += a[i + 1]
            a_new[i] = s
        a = a_new
        for i in range(r):
            for j in range(r):
                s = 0.0
                for k in range(r):
                    s += T[i, k] * P[k, j]
                tmp[i, j] = s
        for i in range(r):
            for j in range(i, r):
                s = 0.0
                for k in range(r):
                    s += tmp[i, k] * T[j, k]
                s += Q[i, j]
                P[i, j] = s
                P[j, i] = s
    if not np.isfinite(ll):
        return np.nan, NON_FINITE, a, P, F_out, v_out
    return ll, OK, a, P, F_out, v_out


def _run(coeffs: ArmaCoeffs, y, keep: bool):
    y = np.ascontiguousarray(y, dtype=float)
    out = _filter(
        np.ascontiguousarray(coeffs.phi, dtype=float),
        np.ascontiguousarray(coeffs.theta, dtype=float),
        float(coeffs.sigma2),
        y,
        keep,
    )
    status = out[1]
    if status != OK:
        raise KalmanError(_STATUS_TEXT[status])
    return out


def loglik_arrays(phi: np.ndarray, theta: np.ndarray, sigma2: float, y: np.ndarray) -> float:
    """Exact log-likelihood on raw arrays; the hot path of the objectives.

    All arrays must be contiguous float64. Raises ``KalmanError``.
    """
    ll, status = _filter(phi, theta, sigma2, y, False)[:2]
    if status != OK:
        raise KalmanError(_STATUS_TEXT[status])
    return ll


def stationary_init(ss: StateSpace) -> np.ndarray:
    """Stationary state covariance from the discrete Lyapunov equation."""
    P, status = _lyapunov(np.ascontiguousarray(ss.T), np.ascontiguousarray(ss.R), float(ss.sigma2))
    if status != OK:
        raise KalmanError(_STATUS_TEXT[status])
    return P


def _coeffs_of(ss_or_coeffs) -> ArmaCoeffs:
    if isinstance(ss_or_coeffs, ArmaCoeffs):
        return ss_or_coeffs
    T, R = ss_or_coeffs.T, ss_or_coeffs.R
    phi = np.trim_zeros(T[:, 0], "b")
    theta = np.trim_zeros(R[1:], "b")
    return ArmaCoeffs(phi, theta, ss_or_coeffs.sigma2)


def kalman_loglik(model, y) -> float:
    """Exact Gaussian log-likelihood of ``y`` under ``model``.

    ``model`` may be an :class:`ArmaCoeffs` or a :class:`StateSpace`.

    Raises
    ------
    KalmanError
        If the stationary initialization fails or an innovation variance is
        non-positive or non-finite.
    """
    return _run(_coeffs_of(model), y, False)[0]


def kalman_filter(model, y) -> KalmanDiagnostics:
    ll, _, a, P, F, v = _run(_coeffs_of(model), y, True)
    return KalmanDiagnostics(ll, F, v, a, P)


def kalman_forecast(model, y, h: int) -> np.ndarray:
    """Point forecasts ``y_{n+1}, ..., y_{n+h}`` given the whole of ``y``."""
    if h < 1:
        raise ValueError("horizon must be >= 1")
    coeffs = _coeffs_of(model)
    ss = build_state_space(coeffs)
    a = _run(coeffs, y, False)[2]
    out = np.empty(h)
    for i in range(h):
        out[i] = a[0]
        a = ss.T @ a
    return out


def concentrated_loglik(phi: np.ndarray, theta: np.ndarray, y: np.ndarray):
    """Profile log-likelihood with sigma2 concentrated out.

    Runs the filter at unit variance and rescales; returns
    ``(loglik, sigma2_hat)``. Not used by the default fitting path.
    """
    y = np.ascontiguousarray(y, dtype=float)
    _, status, _, _, F, v = _filter(phi, theta, 1.0, y, True)
    if status != OK:
        raise KalmanError(_STATUS_TEXT[status])
    n = y.size
    sigma2 = float(np.sum(v * v / F) / n)
    ll = -0.5 * (n * (LOG_2PI + math.log(sigma2) + 1.0) + np.sum(np.log(F)))
    return ll, sigma2
