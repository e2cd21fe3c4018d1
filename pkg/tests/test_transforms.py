import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from armafit.core import ArmaCoeffs, NonCausalError, NonInvertibleError, PacfCoeffs
from armafit.transforms import (
    arma_to_pacf,
    clipped_levinson_inverse,
    clipped_ma_inverse,
    is_causal,
    is_invertible,
    jones_inverse,
    jones_map,
    levinson_forward,
    levinson_inverse,
    ma_forward,
    ma_inverse,
    pacf_to_arma,
)

partials = st.integers(1, 5).flatmap(
    lambda k: arrays(np.float64, k, elements=st.floats(-0.999, 0.999))
)


def test_levinson_hand_values():
    np.testing.assert_allclose(levinson_forward([0.5]), [0.5])
    np.testing.assert_allclose(levinson_forward([0.0, 0.0, 0.0]), [0.0, 0.0, 0.0])
    # phi_1 = rho_1 (1 - rho_2)
    np.testing.assert_allclose(levinson_forward([0.5, 0.2]), [0.4, 0.2], atol=1e-15)
    np.testing.assert_allclose(levinson_inverse([0.9]), [0.9])
    np.testing.assert_allclose(levinson_inverse([0.4, 0.2]), [0.5, 0.2], atol=1e-15)
    with pytest.raises(NonCausalError):
        levinson_inverse([1.5])


def test_ma_hand_values():
    np.testing.assert_allclose(ma_forward([0.5]), [0.5])
    np.testing.assert_allclose(ma_forward([0.5, 0.2]), [0.6, 0.2], atol=1e-15)
    np.testing.assert_allclose(ma_forward(np.zeros(4)), np.zeros(4))
    np.testing.assert_allclose(ma_inverse([0.6, 0.2]), [0.5, 0.2], atol=1e-15)
    np.testing.assert_allclose(ma_inverse([0.3]), [0.3])
    with pytest.raises(NonInvertibleError):
        ma_inverse([-1.2])


def test_empty_vectors():
    assert levinson_forward([]).size == 0
    assert ma_inverse([]).size == 0


def test_jones_hand_values():
    assert jones_map([0.0])[0] == 0.0
    assert jones_map([math.log(3)])[0] == pytest.approx(0.5, abs=1e-15)
    v = jones_map([50.0])[0]
    assert 0.999999 < v < 1.0
    assert jones_inverse([0.0])[0] == 0.0
    assert jones_inverse([0.5])[0] == pytest.approx(math.log(3), abs=1e-15)
    assert np.isfinite(jones_inverse([0.999999])[0])


def test_jones_forms_agree_in_safe_range():
    x = np.linspace(-30, 30, 601)
    np.testing.assert_allclose(jones_map(x, "naive"), jones_map(x, "stable"), atol=1e-15)


def test_jones_naive_overflows():
    with pytest.raises(FloatingPointError):
        jones_map([-800.0], "naive")
    v = jones_map([-800.0], "stable")[0]
    assert -1.0 < v < -0.999999


def test_jones_monotone():
    x = np.sort(np.random.default_rng(0).uniform(-40, 40, 500))
    assert np.all(np.diff(jones_map(x)) >= 0)


@given(arrays(np.float64, 5, elements=st.floats(-8, 8)))
def test_jones_round_trip(x):
    np.testing.assert_allclose(jones_inverse(jones_map(x)), x, atol=1e-12, rtol=0)


@given(arrays(np.float64, 5, elements=st.floats(-30, 30)))
def test_jones_round_trip_conditioning(x):
    # one ulp of rho near +-1 moves x by about eps / (1 - |rho|)
    rho = jones_map(x)
    bound = 1e-12 + 4 * np.finfo(float).eps / (1 - np.abs(rho))
    assert np.all(np.abs(jones_inverse(rho) - x) <= bound)


@given(partials)
def test_levinson_round_trip(rho):
    np.testing.assert_allclose(levinson_inverse(levinson_forward(rho)), rho, atol=1e-10)


@given(partials)
def test_ma_round_trip(b):
    np.testing.assert_allclose(ma_inverse(ma_forward(b)), b, atol=1e-10)


@given(partials)
def test_forward_images_are_feasible(rho):
    assert is_causal(levinson_forward(rho))
    assert is_invertible(ma_forward(rho))
    assert np.all(np.abs(levinson_inverse(levinson_forward(rho))) < 1)


def test_composed_hand_example():
    c = pacf_to_arma(PacfCoeffs([0.5, 0.2], [0.5, 0.2], 1.0))
    np.testing.assert_allclose(c.phi, [0.4, 0.2], atol=1e-15)
    np.testing.assert_allclose(c.theta, [0.6, 0.2], atol=1e-15)
    assert c.sigma2 == 1.0
    z = pacf_to_arma(PacfCoeffs(np.zeros(2), np.zeros(3), 1.0))
    assert not z.phi.any() and not z.theta.any()


def test_round_trip_p5_q5():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        pc = PacfCoeffs(rng.uniform(-0.99, 0.99, 5), rng.uniform(-0.99, 0.99, 5), 1.0)
        back = arma_to_pacf(pacf_to_arma(pc))
        worst = max(worst, np.max(np.abs(back.rho - pc.rho)), np.max(np.abs(back.b - pc.b)))
    assert worst <= 1e-10


def test_boundary_sequence_maps_toward_boundary():
    for r in (0.9, 0.99, 0.999, 0.9999):
        rho = np.array([0.3, r, -0.2])
        back = levinson_inverse(levinson_forward(rho))
        assert np.max(np.abs(back)) == pytest.approx(r, abs=1e-8)


def test_non_causal_polynomial_detected():
    # 1 - 2.5 z + z^2 has a root inside the unit circle
    assert not is_causal([2.5, -1.0])
    with pytest.raises(NonCausalError):
        levinson_inverse([2.5, -1.0])
    assert not is_invertible([2.5, 1.0])


def test_clipped_inverse_lands_in_box():
    rho = clipped_levinson_inverse([2.5, -1.0], 0.99)
    assert np.all(np.abs(rho) <= 0.99)
    b = clipped_ma_inverse([-1.5], 0.99)
    np.testing.assert_allclose(b, [-0.99])
    # feasible input is untouched
    np.testing.assert_allclose(clipped_levinson_inverse([0.4, 0.2], 0.99), [0.5, 0.2], atol=1e-15)


def test_arma_to_pacf_rejects_bad_models():
    with pytest.raises(NonInvertibleError):
        arma_to_pacf(ArmaCoeffs([0.5], [1.0], 1.0))
