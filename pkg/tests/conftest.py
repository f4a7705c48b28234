import pytest

from kappa3.graph import Graph


@pytest.fixture
def two_triangles():
    # triangles 0-1-2 and 2-3-4 sharing the cut vertex 2
    return Graph(5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)])
