"""
Nonparametric tests for comparing fitting methods: Wilcoxon signed-rank,
Friedman rank test and the Nemenyi post-hoc comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy import integrate, special
from scipy.stats import norm, rankdata

from .core import AllZeroDifferences

Alternative = Literal["two_sided", "greater", "less"]

EXACT_MAX_N = 25


@dataclass(frozen=True)
class TestReport:
    statistic: float
    p_value: float
    alternative: str
    n_effective: int
    w_plus: Optional[float] = None
    exact: bool = False

    __test__ = False  # not a pytest class


def _exact_w_plus_tail(ranks: np.ndarray, w_plus: float):
    """Null distribution of W+ by dynamic programming over sign patterns.

    Average ranks are multiples of 1/2, so the work is done on doubled ranks.
    Returns (P(W+ >= w), P(W+ <= w)).
    """
    doubled = np.rint(2 * ranks).astype(int)
    total = int(doubled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    probs = counts / counts.sum()
    w = int(round(2 * w_plus))
    return float(probs[w:].sum()), float(probs[: w + 1].sum())


def wilcoxon_signed_rank(d, alternative: Alternative = "two_sided") -> TestReport:
    """Wilcoxon signed-rank test on paired differences ``d``.

    Zeros are discarded; ties share average ranks. With at most 25 non-zero
    differences the p-value is exact (full enumeration of the sign
    patterns, ties included); otherwise a normal approximation with
    continuity correction and tie-corrected variance is used.

    ``alternative="greater"`` tests for a positive location of ``d``. The
    reported statistic is the standardized W+ (sign follows the direction
    of ``d``), whichever branch produced the p-value.
    """
    if alternative not in ("two_sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")
    d = np.asarray(d, dtype=float).reshape(-1)
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        raise AllZeroDifferences("all paired differences are zero")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    z = (w_plus - mean) / math.sqrt(var) if var > 0 else 0.0

    exact = n <= EXACT_MAX_N
    if exact:
        p_greater, p_less = _exact_w_plus_tail(ranks, w_plus)
    elif var > 0:
        sd = math.sqrt(var)
        p_greater = float(norm.sf((w_plus - mean - 0.5) / sd))
        p_less = float(norm.cdf((w_plus - mean + 0.5) / sd))
    else:
        p_greater = p_less = 1.0
    if alternative == "greater":
        p = p_greater
    elif alternative == "less":
        p = p_less
    else:
        p = min(1.0, 2.0 * min(p_greater, p_less))
    return TestReport(z, min(1.0, p), alternative, n, w_plus, exact)


def rank_methods(errors) -> np.ndarray:
    """Row-wise ranks (1 = lowest error), ties averaged. Shape series x methods."""
    errors = np.asarray(errors, dtype=float)
    if errors.ndim != 2:
        raise ValueError("errors must be a 2-d array (series x methods)")
    if not np.all(np.isfinite(errors) | np.isposinf(errors)):
        raise ValueError("errors must be finite (or +inf for failed fits)")
    return np.apply_along_axis(rankdata, 1, errors)


def friedman(ranks) -> TestReport:
    """Friedman chi-square on a rank matrix, with tie correction."""
    ranks = np.asarray(ranks, dtype=float)
    N, k = ranks.shape
    if k < 2 or N < 2:
        raise ValueError("Friedman test needs at least 2 methods and 2 series")
    mean_ranks = ranks.mean(axis=0)
    stat = 12.0 * N / (k * (k + 1)) * float(np.sum((mean_ranks - (k + 1) / 2.0) ** 2))
    ties = 0.0
    for row in ranks:
        _, t = np.unique(row, return_counts=True)
        ties += float(np.sum(t**3 - t))
    correction = 1.0 - ties / (N * (k**3 - k))
    if correction > 0:
        stat /= correction
    # chi-square upper tail = regularized upper incomplete gamma
    p = float(special.gammaincc((k - 1) / 2.0, stat / 2.0))
    return TestReport(stat, p, "greater", N)


def studentized_range_sf(q: float, k: int) -> float:
    """P(Q > q) for the range of k iid standard normals (infinite df)."""
    if q <= 0:
        return 1.0

    def integrand(z):
        return norm.pdf(z) * (norm.cdf(z) - norm.cdf(z - q)) ** (k - 1)

    cdf, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(min(1.0, max(0.0, 1.0 - k * cdf)))


def nemenyi(ranks) -> np.ndarray:
    """Pairwise Nemenyi p-values from a rank matrix (symmetric, unit diagonal).

    Differences of average ranks are standardized by
    ``sqrt(k (k + 1) / (12 N))`` and referred to the studentized range
    distribution with k groups and infinite degrees of freedom.
    """
    ranks = np.asarray(ranks, dtype=float)
    return nemenyi_from_mean_ranks(ranks.mean(axis=0), ranks.shape[0])


def nemenyi_from_mean_ranks(mean_ranks, n_series: int) -> np.ndarray:
    """Same as ``nemenyi`` when only the average ranks are known."""
    mean_ranks = np.asarray(mean_ranks, dtype=float)
    k = mean_ranks.size
    se = math.sqrt(k * (k + 1) / (12.0 * n_series))
    out = np.ones((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = studentized_range_sf(abs(mean_ranks[i] - mean_ranks[j]) / se, k)
    return out
