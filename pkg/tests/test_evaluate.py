import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from armafit.core import BoundaryTag, DegenerateDenominator, PacfCoeffs
from armafit.evaluate import classify_boundary, mase, naive_scale, score_forecast, scaled_error

TRAIN = [1.0, 2.0, 3.0, 4.0]
ACTUAL = [5.0, 6.0, 7.0]
FORECAST = [5.5, 5.5, 5.5]


def test_hand_example():
    assert mase(TRAIN, ACTUAL, FORECAST) == 2.5 / 3
    assert scaled_error(TRAIN, ACTUAL, FORECAST, 1) == 0.5
    assert scaled_error(TRAIN, ACTUAL, FORECAST, 2) == 0.5
    assert scaled_error(TRAIN, ACTUAL, FORECAST, 3) == 1.5


def test_perfect_and_degenerate():
    assert mase(TRAIN, ACTUAL, ACTUAL) == 0
    assert scaled_error(TRAIN, ACTUAL, [0, 6.0, 0], 2) == 0
    with pytest.raises(DegenerateDenominator):
        naive_scale([2.0, 2.0, 2.0])
    with pytest.raises(ValueError):
        scaled_error(TRAIN, ACTUAL, FORECAST, 4)


def test_mase_is_mean_of_scaled_errors():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        h = int(rng.integers(1, 6))
        train, actual, fc = rng.standard_normal(20), rng.standard_normal(h), rng.standard_normal(h)
        mean = np.mean([scaled_error(train, actual, fc, i) for i in range(1, h + 1)])
        assert mase(train, actual, fc) == pytest.approx(mean, rel=1e-12, abs=1e-12)


@given(st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_scale_free(c):
    rng = np.random.default_rng(0)
    train, actual, fc = rng.standard_normal(15), rng.standard_normal(3), rng.standard_normal(3)
    a = score_forecast(train, actual, fc)
    b = score_forecast(c * train, c * actual, c * fc)
    assert b.mase_h == pytest.approx(a.mase_h, rel=1e-10)
    np.testing.assert_allclose(b.scaled_errors, a.scaled_errors, rtol=1e-10)


def test_classification_examples():
    assert classify_boundary(PacfCoeffs([0.995, 0.1], [0.2], 1.0), 0.02).tag is BoundaryTag.NEAR_AR
    assert classify_boundary(PacfCoeffs([0.5], [-0.99], 1.0), 0.02).tag is BoundaryTag.NEAR_MA
    assert classify_boundary(PacfCoeffs([0.5], [0.5], 1.0), 0.02).tag is BoundaryTag.STRICTLY_FEASIBLE
    assert classify_boundary(PacfCoeffs([-0.999], [0.999], 1.0), 0.02).tag is BoundaryTag.NEAR_BOTH
    assert classify_boundary(PacfCoeffs([], [0.5], 1.0), 0.02).tag is BoundaryTag.STRICTLY_FEASIBLE


def test_classification_permutation_invariant():
    rng = np.random.default_rng(4)
    for _ in range(200):
        rho = rng.uniform(-1, 1, 4) * 0.9999
        b = rng.uniform(-1, 1, 2) * 0.9999
        a = classify_boundary(PacfCoeffs(rho, b, 1.0), 0.02).tag
        assert classify_boundary(PacfCoeffs(rng.permutation(rho), b[::-1], 1.0), 0.02).tag is a
