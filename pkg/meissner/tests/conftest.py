import numpy as np
import pytest

from meissner.profiles import RadialGrid
from meissner.self_consistent import iterate


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cylinder_grid():
    """Nodes on [0, 1] only, spacing 1e-3"""
    return RadialGrid.create(1001, 1.0)


@pytest.fixture(scope="session")
def coarse_grid():
    """Spacing 5e-3 out to rho = 6"""
    return RadialGrid.with_spacing(200, 6.0)


@pytest.fixture(scope="session")
def london_state(coarse_grid):
    """Converged self-consistent state at kappa = 5, b = 0.9 on the coarse grid"""
    from meissner.self_consistent import confined_grid

    sol = iterate(5.0, 0.9, confined_grid(coarse_grid, 0.9), tol=1e-8)
    assert sol.converged
    return sol


@pytest.fixture(scope="session")
def strong_state(coarse_grid):
    """Converged self-consistent state at kappa = 10, b = 0.9 on the coarse grid"""
    from meissner.self_consistent import confined_grid

    sol = iterate(10.0, 0.9, confined_grid(coarse_grid, 0.9), tol=1e-8)
    assert sol.converged
    return sol
