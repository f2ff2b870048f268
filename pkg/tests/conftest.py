import numpy as np
import pytest

from mixdenoise import build_exact_unbiased_lut


@pytest.fixture(scope="session")
def lut_sigma0():
    return build_exact_unbiased_lut(0.0, 30.0)


@pytest.fixture(scope="session")
def lut_sigma1():
    return build_exact_unbiased_lut(1.0, 30.0)


@pytest.fixture(scope="session")
def lut_sigma2():
    return build_exact_unbiased_lut(2.0, 30.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
