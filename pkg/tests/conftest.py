"""Shared fixtures: model constants and seeded state sampling."""

import pytest

from j2lab.elements import ModelParams
from j2lab.sampling import make_rng, random_delaunay_states


@pytest.fixture(scope="session")
def params():
    """Nondimensional constants with an Earth-like oblateness coefficient."""
    return ModelParams(mu=1.0, re=1.0, c20=-1.08262668e-3, epsilon=1.0)


@pytest.fixture()
def rng():
    return make_rng(20190531)


@pytest.fixture()
def random_states(params, rng):
    """Factory for seeded random Delaunay batches."""

    def factory(n, **kwargs):
        return random_delaunay_states(n, rng, params, **kwargs)

    return factory
