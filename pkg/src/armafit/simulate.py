"""
Simulation of ARMA processes, sampling of feasible ground truths, the
experiment dataset grid, and the autocovariance-based likelihood oracle.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.signal import lfilter

from .core import (
    ArmaCoeffs,
    ArmaOrder,
    BoundaryClass,
    PacfCoeffs,
    TimeSeries,
    substream,
)
from .evaluate import classify_boundary
from .transforms import pacf_to_arma

DEFAULT_EPSILON = 1e-2

# (k, rng) -> k partial coefficients in (-1, 1)
SamplingLaw = Callable[[int, np.random.Generator], np.ndarray]


def uniform_pacf_law(epsilon: float = DEFAULT_EPSILON) -> SamplingLaw:
    """Independent uniform partial coefficients on (-1 + eps, 1 - eps)."""

    def draw(k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-1.0 + epsilon, 1.0 - epsilon, size=k)

    return draw


def jones1987_ar_exponents(k: int) -> Tuple[int, int]:
    """Exponents (a, b) of the density ``(1 + r)^a (1 - r)^b`` of the k-th
    partial autocorrelation when phi is uniform over the causal region
    (the Jacobian of the Levinson map factorizes over k)."""
    return (k - 1) // 2, k // 2


def jones1987_law(kind: str = "ar") -> SamplingLaw:
    """Partial coefficients whose image is uniform over the causal (``kind="ar"``)
    or invertible (``kind="ma"``) coefficient region."""

    def draw(k: int, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(k)
        for j in range(1, k + 1):
            a, b = jones1987_ar_exponents(j)
            if kind == "ma":
                a, b = b, a
            # (1 + r)/2 ~ Beta(a + 1, b + 1)
            out[j - 1] = 2.0 * rng.beta(a + 1, b + 1) - 1.0
        return out

    return draw


@dataclass(frozen=True)
class GroundTruth:
    coeffs: ArmaCoeffs
    pacf: PacfCoeffs
    boundary: BoundaryClass


def sample_feasible(
    order: ArmaOrder,
    rng: np.random.Generator,
    *,
    ar_law: Optional[SamplingLaw] = None,
    ma_law: Optional[SamplingLaw] = None,
    sigma2: float = 1.0,
    tau: float = 2 * DEFAULT_EPSILON,
) -> GroundTruth:
    ar_law = ar_law or uniform_pacf_law()
    ma_law = ma_law or ar_law
    rho = ar_law(order.p, rng) if order.p else np.zeros(0)
    b = ma_law(order.q, rng) if order.q else np.zeros(0)
    pacf = PacfCoeffs(rho, b, sigma2)
    return GroundTruth(pacf_to_arma(pacf), pacf, classify_boundary(pacf, tau))


def burn_in_length(order: ArmaOrder) -> int:
    return max(500, 10 * (order.p + order.q))


def simulate_arma(truth: ArmaCoeffs, n: int, rng: np.random.Generator) -> TimeSeries:
    """Realization of length ``n`` driven by N(0, sigma2) innovations.

    The recursion starts from zeros and the first ``burn_in_length`` values
    are discarded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    burn = burn_in_length(truth.order)
    eps = rng.normal(0.0, math.sqrt(truth.sigma2), size=n + burn)
    ar = np.concatenate(([1.0], -truth.phi))
    ma = np.concatenate(([1.0], truth.theta))
    y = lfilter(ma, ar, eps)
    return TimeSeries(y[burn:])


def psi_weights(truth: ArmaCoeffs, tol: float = 1e-14, max_terms: int = 2_000_000) -> np.ndarray:
    """MA(infinity) weights of a causal ARMA model, truncated once the tail
    bound ``max|psi_recent| / (1 - spectral_radius)`` falls below ``tol``."""
    phi, theta = truth.phi, truth.theta
    p, q = phi.size, theta.size
    if p == 0:
        return np.concatenate(([1.0], theta))
    companion = np.zeros((p, p))
    companion[0] = phi
    companion[np.arange(1, p), np.arange(p - 1)] = 1.0
    radius = float(np.max(np.abs(np.linalg.eigvals(companion))))
    if radius >= 1.0:
        raise ValueError("model is not causal")
    slack = 1.0 - radius
    psi = [1.0]
    j = 1
    while j < max_terms:
        val = theta[j - 1] if j <= q else 0.0
        for i in range(1, min(j, p) + 1):
            val += phi[i - 1] * psi[j - i]
        psi.append(val)
        if j >= q and j >= p:
            recent = max(abs(v) for v in psi[-p:])
            if recent / slack < tol:
                break
        j += 1
    return np.array(psi)


def acvf(truth: ArmaCoeffs, max_lag: int) -> np.ndarray:
    """Autocovariances gamma(0..max_lag) from the psi-weights."""
    psi = psi_weights(truth)
    out = np.zeros(max_lag + 1)
    for k in range(min(max_lag, psi.size - 1) + 1):
        out[k] = truth.sigma2 * float(np.dot(psi[: psi.size - k], psi[k:]))
    return out


def dense_loglik_oracle(truth: ArmaCoeffs, y) -> float:
    """Log-density of N(0, Gamma) with Toeplitz Gamma built from ``acvf``."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n > 256:
        raise ValueError("dense oracle limited to n <= 256")
    gamma = acvf(truth, n - 1)
    cov = scipy.linalg.toeplitz(gamma)
    chol = scipy.linalg.cholesky(cov, lower=True)
    z = scipy.linalg.solve_triangular(chol, y, lower=True)
    return float(-0.5 * (n * math.log(2 * math.pi) + 2.0 * np.sum(np.log(np.diag(chol))) + z @ z))


@dataclass(frozen=True)
class DatasetSpec:
    lengths: Tuple[int, ...] = (100, 1000, 10000)
    sigmas: Tuple[float, ...] = (0.01, 0.1, 1.0)
    orders: Tuple[Tuple[int, int], ...] = tuple(itertools.product(range(1, 6), range(1, 6)))
    replicates: int = 10
    seed: int = 0
    epsilon: float = DEFAULT_EPSILON

    @property
    def n_series(self) -> int:
        return len(self.lengths) * len(self.sigmas) * len(self.orders) * self.replicates

    def cells(self) -> Iterable[Tuple[int, int, float, Tuple[int, int], int]]:
        """Yields (index, length, sigma, order, replicate) in manifest order."""
        idx = 0
        for n in self.lengths:
            for sigma in self.sigmas:
                for order in self.orders:
                    for rep in range(self.replicates):
                        yield idx, n, sigma, tuple(order), rep
                        idx += 1

    def to_dict(self) -> Dict:
        return {
            "lengths": list(self.lengths),
            "sigmas": list(self.sigmas),
            "orders": [list(o) for o in self.orders],
            "replicates": self.replicates,
            "seed": self.seed,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d: Dict) -> "DatasetSpec":
        return cls(
            lengths=tuple(int(n) for n in d["lengths"]),
            sigmas=tuple(float(s) for s in d["sigmas"]),
            orders=tuple((int(p), int(q)) for p, q in d["orders"]),
            replicates=int(d["replicates"]),
            seed=int(d.get("seed", 0)),
            epsilon=float(d.get("epsilon", DEFAULT_EPSILON)),
        )


PRESETS: Dict[str, DatasetSpec] = {
    "paper": DatasetSpec(),
    "desk": DatasetSpec(lengths=(100, 500), sigmas=(1.0,), orders=((1, 1), (2, 1), (2, 2)), replicates=5),
}


def preset(name: str, seed: int = 0, **overrides) -> DatasetSpec:
    return dataclasses.replace(PRESETS[name], seed=seed, **overrides)


@dataclass
class SeriesEntry:
    series_id: str
    index: int
    order: Tuple[int, int]
    length: int
    sigma: float
    replicate: int
    truth: GroundTruth
    series: TimeSeries = field(repr=False)


def generate_series(spec: DatasetSpec) -> List[SeriesEntry]:
    """Draw every ground truth and realization of the grid in memory."""
    tau = 2 * spec.epsilon
    law = uniform_pacf_law(spec.epsilon)
    out = []
    for idx, n, sigma, (p, q), rep in spec.cells():
        truth = sample_feasible(
            ArmaOrder(p, q), substream(spec.seed, "truth", idx),
            ar_law=law, sigma2=sigma * sigma, tau=tau,
        )
        y = simulate_arma(truth.coeffs, n, substream(spec.seed, "simulate", idx))
        out.append(SeriesEntry(f"s{idx:05d}", idx, (p, q), n, sigma, rep, truth, y))
    return out


def generate_dataset(spec: DatasetSpec, out_dir) -> Path:
    """Write one CSV per series plus ``manifest.json`` into ``out_dir``.

    Returns the manifest path.
    """
    from .datasets import write_dataset

    return write_dataset(spec, generate_series(spec), Path(out_dir))
