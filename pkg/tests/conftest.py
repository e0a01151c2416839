import numpy as np
import pytest

from gdlab.objective import (
    appendix_c_objective,
    figure1_objective,
    quadratic_objective,
)


@pytest.fixture
def appc():
    return appendix_c_objective(0.5)


@pytest.fixture
def fig1():
    return figure1_objective()


@pytest.fixture
def quad():
    return quadratic_objective()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
