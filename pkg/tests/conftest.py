import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_store(rng, n, dim):
    from rfir import FeatureStore

    return FeatureStore.from_vectors(rng.standard_normal((n, dim)))


@pytest.fixture
def make_store(rng):
    def _make(n, dim):
        return random_store(rng, n, dim)

    return _make
