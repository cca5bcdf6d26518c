import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qglab.algebra import BlockAlgebra

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

block_dims = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)
seeds = st.integers(0, 2**32 - 1)


@st.composite
def algebras(draw, max_dim=20):
    dims = draw(block_dims)
    while sum(d * d for d in dims) > max_dim:
        dims = dims[:-1] or (1,)
    return BlockAlgebra(dims)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
