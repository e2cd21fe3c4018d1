"""
Bijections between ARMA coefficients, partial autocorrelations and the
unconstrained logistic (Jones) coordinates.

AR side: ``phi = levinson_forward(rho)`` runs the Durbin-Levinson step
``phi_i^(k) = phi_i^(k-1) - rho_k * phi_{k-i}^(k-1)``. MA side uses the same
recursion with a plus sign, which yields coefficients of an invertible
``1 + theta_1 z + ... + theta_q z^q``.

Causality and invertibility are never tested via polynomial roots: the
reverse recursion fails exactly when some partial coefficient leaves
(-1, 1).
"""
from __future__ import annotations

from typing import Literal, Optional, Tuple

import numpy as np

from .core import ArmaCoeffs, DomainError, NonCausalError, NonInvertibleError, PacfCoeffs

# reverse recursion declares the boundary reached at this magnitude
BOUNDARY_TOL = 1e-15

# closest doubles to +-1 from the inside; the stable logistic map is clamped
# here so that saturation never produces an exact boundary point
_ONE_MINUS = np.nextafter(1.0, 0.0)

JonesForm = Literal["stable", "naive"]


def _as_vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def _forward(partial: np.ndarray, sign: float) -> np.ndarray:
    k = partial.size
    out = np.zeros(k)
    for j in range(k):
        r = partial[j]
        prev = out[:j].copy()
        for i in range(j):
            out[i] = prev[i] + sign * r * prev[j - 1 - i]
        out[j] = r
    return out


def _reverse(coeffs: np.ndarray, sign: float, clip: Optional[float] = None) -> Tuple[np.ndarray, bool]:
    """Undo ``_forward``. Returns the partial coefficients and an ok flag.

    With ``clip`` set, every partial coefficient is clipped to
    ``[-clip, clip]`` as it is produced and the recursion carries on, so the
    result is always a valid point of the box.
    """
    k = coeffs.size
    cur = coeffs.astype(float).copy()
    partial = np.zeros(k)
    ok = True
    for j in range(k - 1, -1, -1):
        r = cur[j]
        if not np.isfinite(r) or abs(r) >= 1.0 - BOUNDARY_TOL:
            ok = False
            if clip is None:
                return partial, False
        if clip is not None:
            r = 0.0 if not np.isfinite(r) else float(np.clip(r, -clip, clip))
        partial[j] = r
        if j == 0:
            break
        denom = 1.0 - r * r
        prev = cur[:j].copy()
        for i in range(j):
            cur[i] = (prev[i] - sign * r * prev[j - 1 - i]) / denom
    return partial, ok


def _check_open_interval(x: np.ndarray, name: str) -> None:
    if x.size and not np.all(np.abs(x) < 1.0):
        raise DomainError(f"{name} must lie strictly inside (-1, 1), got {x}")


def levinson_forward(rho) -> np.ndarray:
    """AR coefficients from partial autocorrelations.

    >>> levinson_forward([0.5, 0.2])
    array([0.4, 0.2])
    """
    rho = _as_vector(rho)
    _check_open_interval(rho, "rho")
    return _forward(rho, -1.0)


def levinson_inverse(phi) -> np.ndarray:
    """Partial autocorrelations from causal AR coefficients.

    Raises
    ------
    NonCausalError
        If the reverse recursion meets a partial autocorrelation with
        magnitude at or above ``1 - 1e-15``.
    """
    phi = _as_vector(phi)
    rho, ok = _reverse(phi, -1.0)
    if not ok:
        raise NonCausalError(f"phi={phi} is not causal")
    return rho


def ma_forward(b) -> np.ndarray:
    """MA coefficients from partial moving-average coefficients."""
    b = _as_vector(b)
    _check_open_interval(b, "b")
    return _forward(b, 1.0)


def ma_inverse(theta) -> np.ndarray:
    theta = _as_vector(theta)
    b, ok = _reverse(theta, 1.0)
    if not ok:
        raise NonInvertibleError(f"theta={theta} is not invertible")
    return b


def clipped_levinson_inverse(phi, bound: float) -> np.ndarray:
    """Reverse AR recursion that clips each partial autocorrelation into
    ``[-bound, bound]`` instead of failing. Used to place possibly
    non-causal preliminary estimates inside the optimization box."""
    return _reverse(_as_vector(phi), -1.0, clip=bound)[0]


def clipped_ma_inverse(theta, bound: float) -> np.ndarray:
    return _reverse(_as_vector(theta), 1.0, clip=bound)[0]


def jones_map(x, form: JonesForm = "stable") -> np.ndarray:
    """Logistic map ``(1 - e^{-x}) / (1 + e^{-x})`` onto (-1, 1).

    ``form="stable"`` evaluates ``tanh(x / 2)`` and clamps to the doubles
    adjacent to +-1, so it never overflows and never returns an exact
    boundary value. ``form="naive"`` evaluates the textbook expression with
    floating-point traps enabled: an overflow of ``exp(-x)`` (x below about
    -709) raises ``FloatingPointError``.
    """
    x = _as_vector(x)
    if form == "stable":
        return np.clip(np.tanh(0.5 * x), -_ONE_MINUS, _ONE_MINUS)
    if form == "naive":
        with np.errstate(over="raise", divide="raise", invalid="raise", under="ignore"):
            e = np.exp(-x)
            return (1.0 - e) / (1.0 + e)
    raise ValueError(f"unknown jones form {form!r}")


def jones_inverse(rho) -> np.ndarray:
    rho = _as_vector(rho)
    _check_open_interval(rho, "rho")
    return 2.0 * np.arctanh(rho)


def pacf_to_arma(pacf: PacfCoeffs) -> ArmaCoeffs:
    return ArmaCoeffs(levinson_forward(pacf.rho), ma_forward(pacf.b), pacf.sigma2)


def arma_to_pacf(coeffs: ArmaCoeffs) -> PacfCoeffs:
    return PacfCoeffs(levinson_inverse(coeffs.phi), ma_inverse(coeffs.theta), coeffs.sigma2)


def is_causal(phi) -> bool:
    return _reverse(_as_vector(phi), -1.0)[1]


def is_invertible(theta) -> bool:
    return _reverse(_as_vector(theta), 1.0)[1]
