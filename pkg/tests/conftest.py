import numpy as np
import pytest

from vexs import QuadratureSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture
def fast_quad():
    """Coarser settings for unit tests where speed beats precision."""
    return QuadratureSpec(outer_x_tolerance=1e-6, h_bracket_grid=96,
                          rel_tol=1e-5)
