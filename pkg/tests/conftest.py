import numpy as np
import pytest

from src.formats import RestrictedStateWeights
from src.quantum import make_restricted_state, restricted_state_from_weights

BOUNDARY_WEIGHTS = RestrictedStateWeights(w1=1 / 6, w2=1 / 6, w3=1 / 2, w4=1 / 6)
INTERIOR_WEIGHTS = RestrictedStateWeights(w1=0.2, w2=0.1, w3=0.5, w4=0.2)
CLASSICAL_WEIGHTS = RestrictedStateWeights(w1=1.0, w2=0.0, w3=0.0, w4=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def classical_state():
    return make_restricted_state(1.0, 0.0, 0.0, 0.0)


@pytest.fixture
def boundary_state():
    return restricted_state_from_weights(BOUNDARY_WEIGHTS)


@pytest.fixture
def interior_state():
    return restricted_state_from_weights(INTERIOR_WEIGHTS)
