import pathlib

import numpy as np
import pytest

REPO = pathlib.Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def data_dir():
    return REPO / "data"


@pytest.fixture(scope="session")
def banana_path(data_dir):
    return data_dir / "banana.csv"


@pytest.fixture(scope="session")
def ringnorm_path(data_dir):
    return data_dir / "ringnorm.csv"


def random_pool_instance(rng, n_max=50, d_max=10, kernel_families=("gaussian", "linear")):
    """A random (features, labeled-first order, n_labeled, kernel) tuple for
    divergence tests."""
    from discrepal.kernels import gaussian, linear

    n = int(rng.integers(3, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    x = rng.standard_normal((n, d))
    n_labeled = int(rng.integers(1, n))
    order = rng.permutation(n)
    family = kernel_families[int(rng.integers(len(kernel_families)))]
    kernel = gaussian(float(rng.uniform(0.5, 3.0))) if family == "gaussian" else linear()
    return x[order], n_labeled, kernel


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)
