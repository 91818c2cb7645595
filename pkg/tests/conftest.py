"""
Shared grids and example bundles
"""

import pytest

from torusmhd.examples import FAMILY, KILLING, ExampleBundle, build
from torusmhd.grid import PeriodicGrid


@pytest.fixture(scope="session")
def grid() -> PeriodicGrid:
    return PeriodicGrid([32, 32, 32])


@pytest.fixture(scope="session")
def small_grid() -> PeriodicGrid:
    return PeriodicGrid([16, 16, 16])


@pytest.fixture(scope="session")
def family(grid: PeriodicGrid) -> ExampleBundle:
    return build(FAMILY, grid)


@pytest.fixture(scope="session")
def killing(grid: PeriodicGrid) -> ExampleBundle:
    return build(KILLING, grid)
