import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qctree.tree import MetricTree

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# Y-tree: centre o = 0, tips a = 1, b = 2, c = 3, all at 0.5 from the centre.
Y_A, Y_B, Y_C, Y_O = 1, 2, 3, 0
# side-branch tree: a = 0, b = 1, c = 2, junction j = 3, branch vertex w = 4.
SB_A, SB_B, SB_C, SB_J, SB_W = 0, 1, 2, 3, 4


def y_tree(legs=(0.5, 0.5, 0.5)):
    return MetricTree.from_edge_lengths(4, [(0, 1), (0, 2), (0, 3)], list(legs))


def side_branch_tree():
    """Main path a - j - b with d(a, j) = 0.9, and a branch j - w - c of length 0.1."""
    return MetricTree.from_edge_lengths(5, [(0, 3), (3, 1), (3, 4), (4, 2)], [0.9, 0.1, 0.05, 0.05])


def polyline(points):
    P = np.asarray(points, dtype=np.float64)
    D = np.sqrt(((P[:, None] - P[None]) ** 2).sum(-1))
    return MetricTree(len(P), [(i, i + 1) for i in range(len(P) - 1)], D)


@pytest.fixture
def ytree():
    return y_tree()


@pytest.fixture
def side_branch():
    return side_branch_tree()


@st.composite
def geodesic_trees(draw, min_vertices=2, max_vertices=12):
    """Random recursive trees with edge lengths in [0.05, 1]."""
    V = draw(st.integers(min_vertices, max_vertices))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, V)]
    lengths = draw(st.lists(st.floats(0.05, 1.0), min_size=V - 1, max_size=V - 1))
    return MetricTree.from_edge_lengths(V, [(p, i + 1) for i, p in enumerate(parents)], lengths)


@st.composite
def planar_trees(draw, min_vertices=2, max_vertices=12):
    """Random recursive trees on random plane points with the Euclidean metric."""
    V = draw(st.integers(min_vertices, max_vertices))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, V)]
    seed = draw(st.integers(0, 2**31 - 1))
    P = np.random.default_rng(seed).uniform(0, 1, size=(V, 2))
    D = np.sqrt(((P[:, None] - P[None]) ** 2).sum(-1))
    return MetricTree(V, [(p, i + 1) for i, p in enumerate(parents)], D)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
