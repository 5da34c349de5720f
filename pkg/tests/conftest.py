import numpy as np
import pytest

from fttpde.ftt import FttTensor
from fttpde.grids import torus_domain


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_ftt(domain, ranks, rng):
    """Tensor train with independent standard-normal core entries."""
    cores = [
        rng.standard_normal((ranks[k], g.n, ranks[k + 1]))
        for k, g in enumerate(domain.axes)
    ]
    return FttTensor(cores, domain)


def weighted_dense_norm(values, domain):
    sq = np.asarray(values, dtype=float) ** 2
    for ax, g in enumerate(domain.axes):
        shape = [1] * domain.ndim
        shape[ax] = g.n
        sq = sq * g.weights.reshape(shape)
    return float(np.sqrt(sq.sum()))


@pytest.fixture
def dom2():
    return torus_domain(2, 17)


@pytest.fixture
def dom3():
    return torus_domain(3, 11)


@pytest.fixture
def dom4():
    return torus_domain(4, 7)
