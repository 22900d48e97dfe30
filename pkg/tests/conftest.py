import numpy as np
import pytest
from hypothesis import strategies as st

from repkey import BellDiagonalState


@st.composite
def bell_states(draw):
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3))
    return BellDiagonalState.from_unnormalized(w)


def random_states(count, seed=0):
    rng = np.random.default_rng(seed)
    return [BellDiagonalState(*rng.dirichlet(np.ones(4))) for _ in range(count)]


@pytest.fixture
def states():
    return random_states(100)
