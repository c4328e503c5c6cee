import pytest

from gmtame.algebra.polyring import PolyContext


@pytest.fixture
def xy():
    return PolyContext(["x", "y"])


@pytest.fixture
def xyz():
    return PolyContext(["x", "y", "z"])
