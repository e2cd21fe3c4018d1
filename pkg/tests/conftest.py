import numpy as np
import pytest

from armafit.core import PacfCoeffs
from armafit.transforms import pacf_to_arma


def random_pacf(rng, p, q, bound=0.95, sigma2=1.0):
    return PacfCoeffs(rng.uniform(-bound, bound, p), rng.uniform(-bound, bound, q), sigma2)


def random_model(rng, p, q, bound=0.95, sigma2=1.0):
    return pacf_to_arma(random_pacf(rng, p, q, bound, sigma2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
