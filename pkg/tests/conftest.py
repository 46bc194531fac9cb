import numpy as np
import pytest

import geompert as g


@pytest.fixture
def toy():
    """The built-in two-level gain/loss family with unit constants."""
    return g.toy_model(1.0, 1.0, 1.0)


@pytest.fixture
def toy_frame(toy):
    return g.eigenframe(toy.term(0))


@pytest.fixture
def toy_gens(toy, toy_frame):
    return g.solve_generators(toy, toy_frame, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
