import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qctree.coloring import (
    Coloring,
    ProximityGraph,
    build_graph,
    greedy_color,
    is_proper,
    piece_distance,
    piece_distances,
)
from qctree.generators import generate
from qctree.nets import build_nets, decompose
from qctree.tree import normalize

from conftest import planar_trees


def decomposed(tree):
    return decompose(tree, build_nets(tree))


@pytest.fixture(scope="module")
def vicsek2():
    t = generate(kind="vicsek", depth=2)
    return t, decomposed(t)


def test_shared_vertex_distance_zero(side_branch):
    dec = decomposed(side_branch)
    k11, k31 = dec.pieces
    assert piece_distance(side_branch, k11, k31) == 0.0


def test_distance_matrix_matches_double_loop(vicsek2):
    t, dec = vicsek2
    M = piece_distances(t, dec)
    disjoint = 0
    for i, p in enumerate(dec.pieces):
        for j, q in enumerate(dec.pieces):
            brute = min(t.metric[u, v] for u in p.members for v in q.members) if i != j else 0.0
            assert M[i, j] == brute
            disjoint += brute > 0
    assert disjoint > 0


def test_side_branch_graph(side_branch):
    dec = decomposed(side_branch)
    g = build_graph(side_branch, dec, 2)
    assert g.edges == {((1, 1), (3, 1))}
    col = greedy_color(g)
    assert col.assignment == {(1, 1): 1, (3, 1): 2}
    assert col.A == 2


def test_single_piece_graph(ytree):
    t = normalize(ytree)
    g = build_graph(t, decomposed(t), 64)
    assert g.edges == frozenset()
    assert greedy_color(g).assignment == {(1, 1): 1}


def test_edgeless_and_clique():
    refs = tuple((2, j) for j in range(1, 6))
    col = greedy_color(ProximityGraph(4.0, refs, frozenset()))
    assert set(col.assignment.values()) == {1} and col.A == 1
    clique = frozenset(itertools.combinations(refs, 2))
    col = greedy_color(ProximityGraph(4.0, refs, clique))
    assert col.A == 5
    assert sorted(col.assignment.values()) == [1, 2, 3, 4, 5]


def test_S_below_one_rejected(side_branch):
    with pytest.raises(ValueError):
        build_graph(side_branch, decomposed(side_branch), 0.5)


def test_edges_iff_predicate(vicsek2):
    t, dec = vicsek2
    S = 4.0
    g = build_graph(t, dec, S)
    for p, q in itertools.combinations(dec.pieces, 2):
        close = piece_distance(t, p, q) <= S * 2.0 ** -max(p.level, q.level)
        assert close == ((p.ref, q.ref) in g.edges)


def test_monotone_in_S(vicsek2):
    t, dec = vicsek2
    prev = frozenset()
    for N in range(0, 8):
        edges = build_graph(t, dec, 2.0**N).edges
        assert prev <= edges
        prev = edges


@pytest.mark.parametrize("S", [1.0, 8.0, 128.0])
def test_coloring_properties(vicsek2, S):
    t, dec = vicsek2
    g = build_graph(t, dec, S)
    col = greedy_color(g)
    assert is_proper(g, col)
    assert sorted(set(col.assignment.values())) == list(range(1, col.A + 1))
    assert col.A <= 1 + g.max_degree
    assert greedy_color(g) == col


def test_improper_detected(side_branch):
    g = build_graph(side_branch, decomposed(side_branch), 2)
    assert not is_proper(g, Coloring({(1, 1): 1, (3, 1): 1}, 1, 2.0))


def test_json_round_trip(vicsek2):
    t, dec = vicsek2
    col = greedy_color(build_graph(t, dec, 16.0))
    obj = col.to_json()
    assert set(obj) == {"S", "colors", "A"}
    assert "(1,1)" in obj["colors"]
    assert Coloring.from_json(obj) == col


@settings(max_examples=40)
@given(planar_trees(min_vertices=3, max_vertices=14), st.integers(0, 6))
def test_greedy_proper_on_random_trees(tree, N):
    t = normalize(tree)
    g = build_graph(t, decomposed(t), 2.0**N)
    col = greedy_color(g)
    assert is_proper(g, col)
    # every pair of pieces meeting at a vertex is joined
    dec = decomposed(t)
    for p, q in itertools.combinations(dec.pieces, 2):
        if p.members & q.members:
            assert (p.ref, q.ref) in g.edges
    assert np.all(piece_distances(t, dec) >= 0)
