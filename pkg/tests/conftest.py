"""Shared fixtures: coarse grids keep the unit tests fast; the acceptance
suite builds its own production-resolution grids."""

import numpy as np
import pytest

import openbilliard as ob


@pytest.fixture(scope="session")
def geometry():
    """Canonical geometry: 2 x 3.14 box, guide attached at y_a = 0.5."""
    return ob.BilliardGeometry(guide_offset=0.5)


@pytest.fixture(scope="session")
def coarse_grid(geometry):
    return ob.build_grid(geometry, 0.05)


@pytest.fixture(scope="session")
def smap():
    return ob.make_scaling_map(np.exp(0.3j), -2.0, 1.0)


@pytest.fixture(scope="session")
def smap_check():
    return ob.make_scaling_map(np.exp(0.4j), -2.0, 1.0)
