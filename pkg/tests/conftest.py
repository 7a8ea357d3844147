import numpy as np
import pytest

from physarum.lattice import TrailLattice, build_tube_arena
from physarum.rng import Rng


@pytest.fixture
def small_arena():
    """40x20 tube with 3 wall rows top and bottom."""
    return build_tube_arena(40, 20, 3)


@pytest.fixture
def rng():
    return Rng(2024)


@pytest.fixture
def random_trail(small_arena):
    gen = np.random.default_rng(99)
    values = gen.uniform(0.0, 10.0, size=small_arena.habitable.shape)
    values[~small_arena.habitable] = 0.0
    return TrailLattice(values)
