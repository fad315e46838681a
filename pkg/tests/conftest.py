import pytest

from gausskuzmin.pf_operator import OperatorConfig


@pytest.fixture(scope="session")
def cfg():
    """Default operator configuration (grid 4097, I = 10^4, tail correction on)."""
    return OperatorConfig()


@pytest.fixture(scope="session")
def small_cfg():
    return OperatorConfig(truncation_index=500, grid_size=257)
