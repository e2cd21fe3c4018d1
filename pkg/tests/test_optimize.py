import numpy as np
import pytest

from armafit.core import ArmaOrder, FailureKind, FitFailure
from armafit.estimate import FitConfig, Objective
from armafit.optimize import EvaluationFailure, fd_gradient, five_point_gradient, optimize_bounded
from armafit.simulate import sample_feasible, simulate_arma
from armafit.core import rng_stream


def quad(c):
    return lambda x: -float(np.sum((np.asarray(x) - c) ** 2))


def neg_rosenbrock(x):
    return -((1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2)


def test_fd_gradient_quadratic():
    g = fd_gradient(quad(0.3), np.array([0.0]))
    assert g[0] == pytest.approx(0.6, abs=1e-6)


def test_fd_gradient_stays_in_box():
    seen = []

    def spy(x):
        seen.append(np.array(x))
        return quad(0.3)(x)

    lo, hi = np.array([-0.99, -0.99]), np.array([0.99, 0.99])
    g = fd_gradient(spy, np.array([0.99, -0.99]), lo, hi)
    assert all(np.all(s <= hi) and np.all(s >= lo) for s in seen)
    np.testing.assert_allclose(g, [-2 * (0.99 - 0.3), -2 * (-0.99 - 0.3)], rtol=1e-6)


def test_fd_gradient_narrow_box():
    seen = []

    def spy(x):
        seen.append(float(x[0]))
        return -float(x[0] ** 2)

    fd_gradient(spy, np.array([0.0]), np.array([-1e-7]), np.array([1e-7]))
    assert all(abs(s) <= 1e-7 for s in seen)


def _arma_objective(seed):
    rng = rng_stream(seed)
    truth = sample_feasible(ArmaOrder(2, 1), rng)
    y = simulate_arma(truth.coeffs, 200, rng).values
    return Objective(y, ArmaOrder(2, 1), FitConfig()), rng


def test_fd_gradient_matches_five_point_on_arma():
    obj, rng = _arma_objective(3)
    worst = 0.0
    for _ in range(20):
        x = np.r_[rng.uniform(-0.9, 0.9, 3), rng.uniform(-0.5, 0.5)]
        g = fd_gradient(obj, x, obj.lower, obj.upper)
        ref = five_point_gradient(obj, x)
        worst = max(worst, np.max(np.abs(g - ref)) / max(np.max(np.abs(ref)), 1e-8))
    assert worst <= 1e-4


def test_optimize_interior_and_clipped():
    r = optimize_bounded(quad(0.3), [0.0], [-1.0], [1.0])
    assert r.converged and r.x[0] == pytest.approx(0.3, abs=1e-6)
    r = optimize_bounded(quad(2.0), [0.0], [-1.0], [1.0])
    assert r.x[0] == 1.0


def test_optimize_rosenbrock():
    r = optimize_bounded(neg_rosenbrock, [-1.2, 1.0], [-2, -2], [2, 2], tol=1e-9, ftol=0, max_iters=2000)
    np.testing.assert_allclose(r.x, [1.0, 1.0], atol=1e-4)


def test_optimize_respects_box_and_ascends():
    obj, rng = _arma_objective(5)
    seen = []

    def spy(x):
        seen.append(np.array(x))
        return obj(x)

    x0 = np.r_[rng.uniform(-0.9, 0.9, 3), 0.0]
    r = optimize_bounded(spy, x0, obj.lower, obj.upper)
    assert r.failure is None
    assert all(np.all(s >= obj.lower) and np.all(s <= obj.upper) for s in seen)
    assert np.all(np.diff(r.history) >= 0)
    assert r.n_evals == len(seen)


def test_failures_are_returned_not_raised():
    failure = FitFailure(FailureKind.KALMAN, "boom", None, None)

    def bad(x):
        raise EvaluationFailure(failure)

    r = optimize_bounded(bad, [0.0], [-1.0], [1.0])
    assert r.failure is failure and not r.converged


def test_failing_region_keeps_best_point():
    failure = FitFailure(FailureKind.KALMAN, "wall", None, None)

    def walled(x):
        if x[0] > 0.5:
            raise EvaluationFailure(failure)
        return quad(2.0)(x)

    # trial points beyond the wall are rejected; once the gradient stencil
    # itself hits the wall the last accepted point is returned with the failure
    r = optimize_bounded(walled, [0.0], [-1.0], [1.0])
    assert 0.4 < r.x[0] <= 0.5 and np.isfinite(r.value)
    assert r.failure is None or r.failure is failure
    assert np.all(np.diff(r.history) >= 0)
