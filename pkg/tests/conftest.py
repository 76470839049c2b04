import numpy as np
import pytest

from nio import MapSpec, NoiseKernel, Partition, annealed_matrix, deterministic_matrix


@pytest.fixture(scope="session")
def map5():
    return MapSpec(5.0, 1.0)


@pytest.fixture(scope="session")
def det5_1024(map5):
    return deterministic_matrix(map5, Partition(1024))


@pytest.fixture(scope="session")
def annealed5_05_1024(map5, det5_1024):
    return annealed_matrix(map5, NoiseKernel.uniform(0.5), "periodic", Partition(1024), det=det5_1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
