import numpy as np
import pytest

from covsel import benchmark_model, population_covariances

from _oracles import load_pinned_criteria


@pytest.fixture(scope="session")
def model():
    return benchmark_model()


@pytest.fixture(scope="session")
def pop_suite(model):
    return population_covariances(model)


@pytest.fixture(scope="session")
def pinned():
    """Committed brute-force population criterion values, keyed '1,4,7'-style."""
    return load_pinned_criteria()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_spd(rng, p, scale=1.0):
    """A random well-conditioned symmetric positive definite matrix."""
    a = rng.standard_normal((p, p))
    return scale * (a @ a.T + p * np.eye(p))
