import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qctree.generators import generate
from qctree.nets import (
    Piece,
    audit_nets,
    audit_pieces,
    build_nets,
    compute_M,
    decompose,
    hull,
    scale_index,
    traversal,
    valley_ok,
)
from qctree.tree import MetricTree, leaves, normalize, path

import oracle
from conftest import SB_A, SB_B, SB_C, SB_J, SB_W, Y_A, Y_B, Y_C, geodesic_trees, planar_trees, y_tree


def checks_by_name(report):
    return {c["check"]: c for c in report["checks"]}


# -- nets ------------------------------------------------------------------------------------


def test_y_tree_single_level(ytree):
    nets = build_nets(normalize(ytree))
    assert nets.levels == (frozenset({Y_A, Y_B, Y_C}),)
    assert nets.n_max == 1


def test_side_branch_nets(side_branch):
    nets = build_nets(side_branch)
    assert nets.net(1) == {SB_A, SB_B}
    assert nets.net(2) == {SB_A, SB_B}
    assert nets.net(3) == {SB_A, SB_B, SB_C}
    assert nets.n_max == 3
    assert nets.net(0) == frozenset()
    assert nets.net(9) == leaves(side_branch)


def test_two_leaf_path():
    t = normalize(MetricTree.from_edge_lengths(2, [(0, 1)], [3.0]))
    nets = build_nets(t)
    assert nets.levels == (frozenset({0, 1}),)


def test_build_nets_requires_normalized():
    with pytest.raises(ValueError):
        build_nets(y_tree((1.0, 1.0, 1.0)))


@given(planar_trees(min_vertices=3, max_vertices=14))
def test_net_invariants(tree):
    t = normalize(tree)
    nets = build_nets(t)
    assert all(c["pass"] for c in audit_nets(t, nets))
    for n in range(1, nets.n_max):
        assert nets.net(n) <= nets.net(n + 1)
    assert nets.net(nets.n_max) == leaves(t)


# -- hulls and pieces ----------------------------------------------------------------------------


def test_hull_examples(ytree, side_branch):
    assert hull(ytree, {Y_B}) == {Y_B}
    assert hull(ytree, {Y_A, Y_B, Y_C}) == set(range(4))
    assert hull(side_branch, {SB_A, SB_B}) == {SB_A, SB_J, SB_B}


def test_side_branch_pieces(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    assert [p.ref for p in dec.pieces] == [(1, 1), (3, 1)]
    k11, k31 = dec.pieces
    assert k11.members == {SB_A, SB_J, SB_B} and k11.root == SB_A
    assert k31.members == {SB_J, SB_W, SB_C} and k31.root == SB_J
    assert k31.new_net_points == {SB_C}
    assert dec.by_level[2] == ()


def test_side_branch_audit(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    report = audit_pieces(side_branch, dec)
    assert report["pass"]
    stats = {(s["n"], s["j"]): s for s in report["pieces"]}
    # branch of length 0.1 with the geodesic metric
    assert stats[(3, 1)]["diameter"] == pytest.approx(0.1)
    assert stats[(3, 1)]["diameter"] <= 2.0 ** (2 - 3)


def test_single_piece_clauses_vacuous(ytree):
    t = normalize(ytree)
    dec = decompose(t, build_nets(t))
    assert len(dec.pieces) == 1 and dec.pieces[0].members == set(range(4))
    checks = checks_by_name(audit_pieces(t, dec))
    for name in ("piece_single_contact", "piece_overlap"):
        assert checks[name]["pass"] and checks[name]["vacuous"]


def test_root_mutation_detected(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    k11, k31 = dec.pieces
    moved = Piece(k31.level, k31.index, k31.members, SB_W, k31.new_net_points)
    report = audit_pieces(side_branch, dec.replace_pieces([k11, moved]))
    checks = checks_by_name(report)
    assert not report["pass"]
    assert not checks["piece_single_contact"]["pass"]


def test_dropped_vertex_detected(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    k11, k31 = dec.pieces
    shrunk = Piece(3, 1, frozenset({SB_J, SB_W}), SB_J, frozenset())
    checks = checks_by_name(audit_pieces(side_branch, dec.replace_pieces([k11, shrunk])))
    assert not checks["pieces_cover"]["pass"]
    assert not checks["piece_new_net_point"]["pass"]


@settings(max_examples=60)
@given(planar_trees(min_vertices=2, max_vertices=14))
def test_every_edge_in_one_piece(tree):
    t = normalize(tree)
    dec = decompose(t, build_nets(t))
    assert audit_pieces(t, dec)["pass"]
    for u, v in t.edges:
        owners = [p.ref for p in dec.pieces if u in p.members and v in p.members]
        assert len(owners) == 1
        assert dec.pieces[dec.edge_piece(u, v)].ref == owners[0]


@pytest.mark.parametrize("spec", [dict(kind="vicsek", depth=2), dict(kind="random_tree", n=50, seed=1)])
def test_corpus_audit(spec):
    t = generate(**spec)
    assert audit_pieces(t, decompose(t, build_nets(t)))["pass"]


# -- traversals ------------------------------------------------------------------------------------


def test_side_branch_traversal(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    tr = traversal(side_branch, dec, SB_B, SB_C)
    assert tr.pieces == ((1, 1), (3, 1))
    assert tr.points == (SB_B, SB_J, SB_C)
    assert tr.valley == 0
    assert tr.levels == (1, 3)


def test_same_piece_traversal(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    tr = traversal(side_branch, dec, SB_A, SB_B)
    assert tr.pieces == ((1, 1),)
    assert tr.points == (SB_A, SB_B)


def test_traversal_needs_distinct_endpoints(side_branch):
    dec = decompose(side_branch, build_nets(side_branch))
    with pytest.raises(ValueError):
        traversal(side_branch, dec, SB_A, SB_A)


def test_valley_rule():
    assert valley_ok((3, 2, 1, 2, 4), 2)
    assert valley_ok((1,), 0)
    assert not valley_ok((3, 3, 1), 2)
    assert not valley_ok((1, 2, 2), 0)


@settings(max_examples=40)
@given(geodesic_trees(min_vertices=3, max_vertices=12), st.data())
def test_traversal_covers_path(tree, data):
    t = normalize(tree)
    dec = decompose(t, build_nets(t))
    V = t.n_vertices
    x = data.draw(st.integers(0, V - 1))
    y = data.draw(st.integers(0, V - 1).filter(lambda v: v != x))
    tr = traversal(t, dec, x, y)
    assert tr.points[0] == x and tr.points[-1] == y
    assert valley_ok(tr.levels, tr.valley)
    joined = [x]
    for a, b, ref in zip(tr.points[:-1], tr.points[1:], tr.pieces):
        seg = path(t, a, b)
        assert set(seg) <= dec.by_ref[ref].members
        assert len(set(path(t, x, y)) & dec.by_ref[ref].members) >= 2
        joined += seg[1:]
    assert tuple(joined) == path(t, x, y)


# -- scale index and M ------------------------------------------------------------------------------------


@pytest.mark.parametrize("d, n", [(0.2, 2), (0.25, 2), (0.2500001, 1), (1.0, 0), (0.6, 0), (0.5, 1), (2.0**-7, 7)])
def test_scale_index(d, n):
    assert scale_index(d) == n


def test_M_values(ytree, side_branch):
    t = normalize(ytree)
    assert compute_M(t, decompose(t, build_nets(t))) == 1
    # the pair (junction, c) at scale 3 meets both pieces
    dec = decompose(side_branch, build_nets(side_branch))
    assert compute_M(side_branch, dec) == 2


def test_koch_M_regression():
    t = generate(kind="koch_arc", depth=3)
    dec = decompose(t, build_nets(t))
    levels = oracle.naive_nets(t)
    _, pieces = oracle.naive_pieces(t, levels)
    assert compute_M(t, dec) == oracle.naive_M(t, pieces) == 1


# -- oracle equivalence on small trees -----------------------------------------------------------------------


def assert_matches_oracle(t):
    nets = build_nets(t)
    dec = decompose(t, nets)
    levels = oracle.naive_nets(t)
    hulls, pieces = oracle.naive_pieces(t, levels)
    assert [set(L) for L in nets.levels] == levels
    assert [set(dec.hulls[n]) for n in range(1, nets.n_max + 1)] == hulls
    assert [(p.level, p.index, p.root, set(p.members)) for p in dec.pieces] == pieces
    assert compute_M(t, dec) == oracle.naive_M(t, pieces)
    for x in range(t.n_vertices):
        for y in range(t.n_vertices):
            if x != y:
                tr = traversal(t, dec, x, y)
                refs, pts, valley = oracle.naive_traversal(t, pieces, x, y)
                assert (list(tr.pieces), list(tr.points), tr.valley) == (refs, pts, valley)


@settings(max_examples=80)
@given(geodesic_trees(min_vertices=2, max_vertices=12))
def test_oracle_geodesic(tree):
    assert_matches_oracle(normalize(tree))


@settings(max_examples=80)
@given(planar_trees(min_vertices=2, max_vertices=12))
def test_oracle_planar(tree):
    assert_matches_oracle(normalize(tree))


def test_oracle_side_branch(side_branch):
    assert_matches_oracle(side_branch)
    assert np.isclose(side_branch.metric[SB_B, SB_C], 0.2)
