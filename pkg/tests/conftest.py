import numpy as np
import pytest

from tactran.contact import ElasticLayer
from tactran.geometry import (
    build_default_layout,
    default_camera_grid,
    default_tactile_grid,
)


@pytest.fixture(scope="session")
def layout():
    return build_default_layout()


@pytest.fixture(scope="session")
def tactile_grid(layout):
    return default_tactile_grid(layout)


@pytest.fixture(scope="session")
def tactile_grid_ds4(layout):
    return default_tactile_grid(layout, downsample=4)


@pytest.fixture(scope="session")
def camera_grid_ds4(layout):
    return default_camera_grid(layout, downsample=4)


@pytest.fixture(scope="session")
def layer():
    return ElasticLayer()


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
