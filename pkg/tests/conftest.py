import numpy as np
import pytest

from oamid.lg import ModeGeometry
from oamid.masks import StripSpec, half_plane, make_cross, random_smooth_mask, uniform_mask

W0 = 210.0  # micrometers
STRIP_WIDTH = 0.83 * W0


@pytest.fixture
def geometry():
    return ModeGeometry(w0=W0, l_max=6)


@pytest.fixture
def geometry_full():
    return ModeGeometry(w0=W0, l_max=12)


@pytest.fixture
def empty(geometry):
    return uniform_mask(geometry)


@pytest.fixture
def cross2(geometry):
    return make_cross(2, StripSpec(width=STRIP_WIDTH), geometry=geometry)


@pytest.fixture
def cross3(geometry):
    return make_cross(3, StripSpec(width=STRIP_WIDTH), geometry=geometry)


@pytest.fixture
def triangle(geometry):
    """Three strips with alternating offsets: 3-fold symmetric."""
    d = 15.0
    return make_cross(3, StripSpec(width=STRIP_WIDTH), (d, -d, d), geometry)


@pytest.fixture
def smooth(geometry):
    return random_smooth_mask(11, geometry)


@pytest.fixture
def halfplane(geometry):
    return half_plane(geometry)


def rel_err(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)))
