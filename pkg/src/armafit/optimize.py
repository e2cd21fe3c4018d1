"""
Finite-difference gradients and a projected limited-memory quasi-Newton
ascent for box-constrained maximization.

Objectives are plain callables ``f(x) -> float``. A failing evaluation
raises :class:`EvaluationFailure`; the optimizer treats failures at line
search trial points as rejected steps and gives up (returning the best point
so far plus the failure) only when it cannot make progress otherwise.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .core import FitFailure

EPS = np.finfo(float).eps
FD_REL_STEP = EPS ** (1.0 / 3.0)


class EvaluationFailure(Exception):
    """Raised by an objective that cannot be evaluated at a point."""

    def __init__(self, failure: FitFailure):
        super().__init__(f"{failure.kind.value}: {failure.detail}")
        self.failure = failure


def fd_step(x: np.ndarray) -> np.ndarray:
    return FD_REL_STEP * np.maximum(1.0, np.abs(x))


def fd_gradient(f: Callable, x, lower=None, upper=None, f0: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient that never leaves ``[lower, upper]``.

    Coordinates closer than one step to a bound use the second-order
    one-sided stencil ``(3 f(x) - 4 f(x - h) + f(x - 2h)) / (2h)`` pointing
    into the box (``f0`` saves the evaluation at ``x`` if already known).
    Costs two evaluations per coordinate, plus at most one for ``f0``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    h = fd_step(x)
    grad = np.empty(n)
    for i in range(n):
        hi = h[i]
        fwd_ok = x[i] + hi <= upper[i]
        bwd_ok = x[i] - hi >= lower[i]
        xp = x.copy()
        if fwd_ok and bwd_ok:
            xp[i] = x[i] + hi
            fp = f(xp)
            xp[i] = x[i] - hi
            fm = f(xp)
            grad[i] = (fp - fm) / (2.0 * hi)
            continue
        room_up, room_down = upper[i] - x[i], x[i] - lower[i]
        direction = 1.0 if room_up >= room_down else -1.0
        if 2 * hi > max(room_up, room_down):
            # box narrower than two steps in this coordinate
            hi = 0.5 * max(room_up, room_down)
        if f0 is None:
            f0 = f(x)
        xp[i] = x[i] + direction * hi
        f1 = f(xp)
        xp[i] = x[i] + 2 * direction * hi
        f2 = f(xp)
        grad[i] = direction * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * hi)
    return grad


def five_point_gradient(f: Callable, x, step: Optional[float] = None) -> np.ndarray:
    """Fourth-order central stencil; a reference for checking ``fd_gradient``."""
    x = np.asarray(x, dtype=float)
    h = (EPS ** 0.2 if step is None else step) * np.maximum(1.0, np.abs(x))
    grad = np.empty(x.size)
    for i in range(x.size):
        vals = []
        for k in (2, 1, -1, -2):
            xp = x.copy()
            xp[i] += k * h[i]
            vals.append(f(xp))
        grad[i] = (-vals[0] + 8 * vals[1] - 8 * vals[2] + vals[3]) / (12 * h[i])
    return grad


@dataclass
class OptimizeResult:
    x: np.ndarray
    value: float
    n_iters: int
    n_evals: int
    converged: bool
    message: str
    failure: Optional[FitFailure] = None
    history: List[float] = field(default_factory=list)


class _Counted:
    def __init__(self, f):
        self.f = f
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.f(x)


def _two_loop(g: np.ndarray, pairs) -> np.ndarray:
    """L-BFGS product H g for the stored (s, y) pairs."""
    q = g.copy()
    stack = []
    for s, y in reversed(pairs):
        rho = 1.0 / (y @ s)
        a = rho * (s @ q)
        q -= a * y
        stack.append((rho, a, s, y))
    s, y = pairs[-1]
    r = q * ((s @ y) / (y @ y))
    for rho, a, s, y in reversed(stack):
        beta = rho * (y @ r)
        r += s * (a - beta)
    return r


def optimize_bounded(
    f: Callable,
    x0,
    lower,
    upper,
    *,
    max_iters: int = 500,
    tol: float = 1e-6,
    ftol: float = 1e-10,
    memory: int = 10,
    first_step: float = 0.1,
    max_backtracks: int = 40,
    armijo: float = 1e-4,
    gradient: Optional[Callable] = None,
) -> OptimizeResult:
    """Maximize ``f`` over the box ``[lower, upper]`` (bounds may be infinite).

    Projected quasi-Newton ascent: a limited-memory BFGS direction on the
    coordinates not held at a bound, projected back onto the box, with
    Armijo backtracking along the projection arc. Every point handed to
    ``f`` lies in the box.

    Stops when the projected-gradient infinity norm is at most ``tol``, when
    the relative objective gain of an accepted step is at most ``ftol``, or
    after ``max_iters`` iterations.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    fc = _Counted(f)
    grad_fn = gradient or (lambda x, fx: fd_gradient(fc, x, lower, upper, f0=fx))

    x = np.clip(np.asarray(x0, dtype=float), lower, upper)
    try:
        fx = fc(x)
        # minimize F = -f internally
        G = -grad_fn(x, fx)
    except EvaluationFailure as exc:
        return OptimizeResult(x, np.nan, 0, fc.calls, False, "evaluation failed at start", exc.failure)
    history = [fx]
    pairs: deque = deque(maxlen=memory)

    it = 0
    converged = False
    message = "maximum iterations reached"
    while it < max_iters:
        pg = np.clip(x - G, lower, upper) - x
        if np.max(np.abs(pg)) <= tol:
            converged, message = True, "projected gradient below tolerance"
            break
        binding = ((x <= lower) & (G > 0)) | ((x >= upper) & (G < 0))
        free = ~binding
        Gf = np.where(free, G, 0.0)
        use_qn = len(pairs) > 0
        accepted = False
        first_failure = None
        any_finite_trial = False
        for attempt in range(2):
            if use_qn:
                d = -_two_loop(Gf, list(pairs))
                d[binding] = 0.0
                if d @ Gf >= 0:
                    use_qn = False
            if not use_qn:
                d = -Gf * (first_step / max(np.max(np.abs(Gf)), 1e-300))
            t = 1.0
            for _ in range(max_backtracks):
                x_new = np.clip(x + t * d, lower, upper)
                step = x_new - x
                if not np.any(step):
                    break
                try:
                    f_new = fc(x_new)
                except EvaluationFailure as exc:
                    first_failure = first_failure or exc.failure
                    t *= 0.5
                    continue
                any_finite_trial = True
                if -f_new <= -fx + armijo * (G @ step):
                    accepted = True
                    break
                t *= 0.5
            if accepted or not use_qn:
                break
            # quasi-Newton direction failed: forget curvature, retry steepest ascent
            pairs.clear()
            use_qn = False
        if not accepted:
            if first_failure is not None and not any_finite_trial:
                return OptimizeResult(x, fx, it, fc.calls, False, "objective failed at every trial point",
                                      first_failure, history)
            message = "line search could not improve the objective"
            break
        it += 1
        try:
            G_new = -grad_fn(x_new, f_new)
        except EvaluationFailure as exc:
            history.append(f_new)
            return OptimizeResult(x_new, f_new, it, fc.calls, False, "gradient evaluation failed",
                                  exc.failure, history)
        s = x_new - x
        yv = G_new - G
        if s @ yv > EPS * (yv @ yv):
            pairs.append((s, yv))
        gain = f_new - fx
        x, fx, G = x_new, f_new, G_new
        history.append(fx)
        if gain <= ftol * max(abs(fx), 1.0):
            converged, message = True, "relative objective change below ftol"
            break
    return OptimizeResult(x, fx, it, fc.calls, converged, message, None, history)
