import numpy as np
import pytest
from scipy import stats as sps

from armafit.core import AllZeroDifferences
from armafit.stats import (
    friedman,
    nemenyi,
    nemenyi_from_mean_ranks,
    rank_methods,
    studentized_range_sf,
    wilcoxon_signed_rank,
)


def test_wilcoxon_exact_enumeration():
    r = wilcoxon_signed_rank([1, 2, 3])
    assert r.exact and r.w_plus == 6 and r.p_value == pytest.approx(0.25, abs=1e-15)
    assert wilcoxon_signed_rank([1, -1]).p_value == 1.0
    with pytest.raises(AllZeroDifferences):
        wilcoxon_signed_rank([0, 0])


def test_wilcoxon_drops_zeros():
    r = wilcoxon_signed_rank([0, 1, 2, 3, 0])
    assert r.n_effective == 3 and r.p_value == pytest.approx(0.25)


def test_wilcoxon_matches_scipy_without_ties():
    rng = np.random.default_rng(1)
    for n in (5, 12, 25):
        d = rng.standard_normal(n) + 0.3
        for alt, sp in (("two_sided", "two-sided"), ("greater", "greater"), ("less", "less")):
            ref = sps.wilcoxon(d, alternative=sp, method="exact").pvalue
            assert wilcoxon_signed_rank(d, alt).p_value == pytest.approx(ref, rel=1e-10)


def test_wilcoxon_antisymmetry():
    rng = np.random.default_rng(2)
    for n in (10, 40):
        d = rng.standard_normal(n) + 0.2
        a, b = wilcoxon_signed_rank(d), wilcoxon_signed_rank(-d)
        assert b.statistic == pytest.approx(-a.statistic, abs=1e-12)
        assert b.p_value == pytest.approx(a.p_value, abs=1e-12)
        assert wilcoxon_signed_rank(-d, "greater").p_value == pytest.approx(
            wilcoxon_signed_rank(d, "less").p_value, abs=1e-12)


def test_wilcoxon_branches_agree_at_25():
    from armafit import stats

    rng = np.random.default_rng(3)
    for _ in range(20):
        d = rng.standard_normal(25) + rng.uniform(-0.5, 0.5)
        exact = wilcoxon_signed_rank(d).p_value
        saved = stats.EXACT_MAX_N
        stats.EXACT_MAX_N = 0
        try:
            approx = wilcoxon_signed_rank(d).p_value
        finally:
            stats.EXACT_MAX_N = saved
        assert abs(exact - approx) <= 0.02


def test_rank_methods():
    np.testing.assert_array_equal(rank_methods([[0.3, 0.1, 0.2]]), [[3, 1, 2]])
    np.testing.assert_array_equal(rank_methods([[0.1, 0.1, 0.5]]), [[1.5, 1.5, 3]])
    np.testing.assert_array_equal(rank_methods([[1, np.inf, 2]]), [[1, 3, 2]])
    with pytest.raises(ValueError):
        rank_methods([[np.nan, 1.0]])


def test_friedman_hand_example():
    r = friedman([[1, 2, 3], [1, 2, 3]])
    assert r.statistic == pytest.approx(4.0)
    assert r.p_value == pytest.approx(np.exp(-2), abs=1e-12)  # chi2 with 2 df


def test_friedman_null_and_strong():
    assert friedman([[1, 2], [2, 1]]).statistic == 0
    assert friedman([[1, 2], [2, 1]]).p_value == pytest.approx(1.0)
    assert friedman(np.tile(np.arange(1, 8), (100, 1))).p_value < 1e-5


def test_friedman_matches_scipy_and_monotone_invariance():
    rng = np.random.default_rng(4)
    errors = rng.standard_normal((30, 5)).round(1)
    ours = friedman(rank_methods(errors))
    ref = sps.friedmanchisquare(*errors.T)
    assert ours.statistic == pytest.approx(ref.statistic, rel=1e-12)
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9)
    assert friedman(rank_methods(np.exp(errors))).statistic == ours.statistic


def test_studentized_range_matches_scipy():
    for k in (2, 3, 7, 10):
        for q in (0.5, 2.0, 3.5, 5.0):
            ref = sps.studentized_range.sf(q, k, 1e6)
            assert studentized_range_sf(q, k) == pytest.approx(ref, abs=2e-5)


def test_nemenyi_structure():
    m = nemenyi(np.array([[1, 2, 3], [2, 1, 3], [1, 3, 2], [3, 2, 1]], dtype=float))
    np.testing.assert_allclose(m, m.T)
    np.testing.assert_array_equal(np.diag(m), 1)
    equal = nemenyi_from_mean_ranks([2.0, 2.0, 2.0], 10)
    assert np.all(equal == 1)


def test_nemenyi_monotone_in_gap():
    ps = [nemenyi_from_mean_ranks([4.0, 4.0 + g], 50)[0, 1] for g in np.linspace(0, 1, 11)]
    assert np.all(np.diff(ps) <= 0)


def test_nemenyi_large_gap():
    mr = np.full(7, 4.0)
    mr[0], mr[5] = 4.228, 3.825
    assert nemenyi_from_mean_ranks(mr, 2250)[0, 5] <= 0.001
