import numpy as np
import pytest

from qmaplab import builtin_model


@pytest.fixture(scope="session")
def e1():
    return builtin_model("E1")


@pytest.fixture(scope="session")
def e2():
    return builtin_model("E2")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
