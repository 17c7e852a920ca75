"""Nested leaf nets, their hulls, and the decomposition of the tree into pieces.

Level ``n`` of the hierarchy is a ``2**-n``-net of the leaf set.  The hull of
level ``n`` is the union of all paths between its points.  Pieces of level
``n >= 2`` are the closures of the components of ``hull[n] - hull[n-1]``,
grouped by their single contact vertex with ``hull[n-1]``, which is the
piece's root.  The level-1 piece is ``hull[1]`` itself.
"""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .tree import is_connected, leaves, path


class DecompositionError(RuntimeError):
    """The decomposition could not be built consistently from the tree."""


@dataclass(frozen=True)
class NetHierarchy:
    """``levels[n - 1]`` is the net at scale ``2**-n``."""

    levels: tuple
    leaf_set: frozenset

    @property
    def n_max(self):
        return len(self.levels)

    def net(self, n):
        if n <= 0:
            return frozenset()
        if n > self.n_max:
            return self.leaf_set
        return self.levels[n - 1]


@dataclass(frozen=True)
class Piece:
    level: int
    index: int
    members: frozenset
    root: int
    new_net_points: frozenset

    @property
    def ref(self):
        return (self.level, self.index)

    def __repr__(self):
        return f"Piece({self.level},{self.index}; root={self.root}, size={len(self.members)})"


@dataclass(frozen=True, eq=False)
class Decomposition:
    nets: NetHierarchy
    hulls: dict  # level -> frozenset
    pieces: tuple  # ordered by (level, index)
    n_vertices: int
    neighbors: tuple = field(repr=False)
    parent: np.ndarray = field(repr=False)

    @cached_property
    def by_ref(self):
        return {p.ref: p for p in self.pieces}

    @cached_property
    def piece_index(self):
        return {p.ref: i for i, p in enumerate(self.pieces)}

    @cached_property
    def by_level(self):
        out = {n: () for n in range(1, self.nets.n_max + 1)}
        for p in self.pieces:
            out[p.level] = out[p.level] + (p,)
        return out

    @property
    def root_piece(self):
        return self.pieces[0]

    @property
    def base_root(self):
        """The root of the level-1 piece."""
        return self.pieces[0].root

    @cached_property
    def membership(self):
        out = {v: [] for v in range(self.n_vertices)}
        for p in self.pieces:
            for v in p.members:
                out[v].append(p.ref)
        return {v: tuple(r) for v, r in out.items()}

    @cached_property
    def levels_array(self):
        return np.array([p.level for p in self.pieces], dtype=np.int64)

    @cached_property
    def up_piece(self):
        """Index of the piece holding the edge from each vertex to its parent."""
        up = np.full(self.n_vertices, -1, dtype=np.int64)
        for i, p in enumerate(self.pieces):
            for v in p.members:
                par = self.parent[v]
                if par >= 0 and par in p.members:
                    if up[v] >= 0:
                        raise DecompositionError(f"edge ({v},{par}) lies in two pieces")
                    up[v] = i
        return up

    def edge_piece(self, u, v):
        """Index of the unique piece containing the tree edge ``(u, v)``."""
        if self.parent[u] == v:
            return int(self.up_piece[u])
        if self.parent[v] == u:
            return int(self.up_piece[v])
        raise ValueError(f"({u}, {v}) is not a tree edge")

    @cached_property
    def adjacency_pieces(self):
        """CSR arrays ``(ptr, piece)`` listing the piece of every incident edge."""
        ptr = [0]
        pcs = []
        for u in range(self.n_vertices):
            for v in self.neighbors[u]:
                pcs.append(self.edge_piece(u, v))
            ptr.append(len(pcs))
        return np.array(ptr, dtype=np.int64), np.array(pcs, dtype=np.int64)

    def replace_pieces(self, pieces):
        """Copy with a different piece list (used for mutation tests)."""
        return Decomposition(self.nets, self.hulls, tuple(pieces), self.n_vertices, self.neighbors, self.parent)


@dataclass(frozen=True)
class Traversal:
    """Pieces met by ``path(x, y)`` in at least two vertices, in path order.

    ``points[i]`` is the first vertex of the path inside ``pieces[i]``;
    ``points[-1]`` is ``y``.  ``valley`` is the 0-based index of the piece
    with the smallest level.
    """

    x: int
    y: int
    pieces: tuple
    points: tuple
    valley: int

    @property
    def levels(self):
        return tuple(r[0] for r in self.pieces)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def build_nets(tree):
    """Greedy farthest-point nets on the leaves, nested across scales.

    The first net starts at the smallest leaf id.  At each scale the leaf
    farthest from the current net (ties to the smallest id) is added while
    it is at distance at least ``2**-n``; the next scale continues from
    there.  Stops at the first level containing every leaf.
    """
    if not tree.normalized:
        raise ValueError("build_nets needs a normalized tree")
    leaf_ids = np.array(sorted(leaves(tree)), dtype=np.int64)
    if leaf_ids.size < 2:
        raise ValueError("build_nets needs at least two leaves")
    D = tree.metric[np.ix_(leaf_ids, leaf_ids)]
    chosen = [0]
    mind = D[0].copy()
    levels = []
    n = 1
    while True:
        eps = 2.0**-n
        while True:
            c = int(np.argmax(mind))
            if mind[c] < eps:
                break
            chosen.append(c)
            mind = np.minimum(mind, D[c])
        levels.append(frozenset(int(leaf_ids[c]) for c in chosen))
        if len(chosen) == leaf_ids.size:
            break
        n += 1
    return NetHierarchy(tuple(levels), frozenset(int(v) for v in leaf_ids))


def hull(tree, points):
    """Union of the tree paths between all pairs of ``points``."""
    pts = sorted(int(p) for p in points)
    if not pts:
        return frozenset()
    base = pts[0]
    P = tree.pred
    out = {base}
    for q in pts[1:]:
        w = q
        while w not in out:
            out.add(w)
            w = int(P[base, w])
    return frozenset(out)


def decompose(tree, nets):
    """Split the tree into pieces following the hull filtration of ``nets``."""
    hulls = {n: hull(tree, nets.net(n)) for n in range(1, nets.n_max + 1)}
    level1 = nets.net(1)
    pieces = [Piece(1, 1, hulls[1], min(level1), level1)]
    nbrs = tree.neighbors
    for n in range(2, nets.n_max + 1):
        prev, cur = hulls[n - 1], hulls[n]
        fresh = nets.net(n) - nets.net(n - 1)
        rest = set(cur - prev)
        grouped = {}
        while rest:
            start = min(rest)
            comp = {start}
            stack = [start]
            attach = set()
            while stack:
                u = stack.pop()
                for v in nbrs[u]:
                    if v in prev:
                        attach.add(v)
                    elif v in rest and v not in comp:
                        comp.add(v)
                        stack.append(v)
            rest -= comp
            if len(attach) != 1:
                raise DecompositionError(
                    f"component at level {n} containing {start} touches the previous hull at {sorted(attach)}"
                )
            (a,) = attach
            grouped.setdefault(a, set()).update(comp)
        level_pieces = []
        for root, comp in grouped.items():
            members = frozenset(comp | {root})
            level_pieces.append((min(members), root, members))
        level_pieces.sort()
        for j, (_, root, members) in enumerate(level_pieces, start=1):
            pieces.append(Piece(n, j, members, root, frozenset(members & fresh)))
    return Decomposition(nets, hulls, tuple(pieces), tree.n_vertices, nbrs, np.asarray(tree.parent))


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------


def _check(name, witnesses, vacuous=False, **extra):
    entry = {"check": name, "pass": not witnesses, "witnesses": list(witnesses)[:20]}
    if vacuous:
        entry["vacuous"] = True
    entry.update(extra)
    return entry


def piece_leaves(tree, members):
    """Vertices of degree at most one inside the subtree spanned by ``members``."""
    if len(members) == 1:
        return frozenset(members)
    return frozenset(u for u in members if sum(v in members for v in tree.neighbors[u]) <= 1)


def audit_nets(tree, nets):
    D = tree.metric
    leaf_list = sorted(nets.leaf_set)
    nesting, separation, covering = [], [], []
    for n in range(1, nets.n_max + 1):
        net = sorted(nets.net(n))
        if n > 1 and not nets.net(n - 1) <= nets.net(n):
            nesting.append(n)
        eps = 2.0**-n
        for i, a in enumerate(net):
            for b in net[i + 1 :]:
                if D[a, b] < eps:
                    separation.append([n, a, b])
        for q in leaf_list:
            if min(D[q, a] for a in net) >= eps:
                covering.append([n, q])
    checks = [
        _check("nets_nested", nesting),
        _check("nets_separated", separation),
        _check("nets_covering", covering),
        _check("nets_terminate", [] if nets.net(nets.n_max) == nets.leaf_set else [nets.n_max]),
    ]
    return checks


def audit_pieces(tree, dec):
    """Check the structural properties of every piece and hull.

    Returns a dict with ``checks`` (one entry per property, with
    ``pass`` and ``witnesses``), per-piece statistics, and an aggregate
    ``pass`` flag.  Failures are reported, never raised.
    """
    D = tree.metric
    A = tree.arc_diameters
    nets = dec.nets
    leaf_set = leaves(tree)
    checks = audit_nets(tree, nets)

    hull_eq, hull_mono = [], []
    for n in range(1, nets.n_max + 1):
        if dec.hulls[n] != hull(tree, nets.net(n)):
            hull_eq.append(n)
        if n > 1 and not dec.hulls[n - 1] <= dec.hulls[n]:
            hull_mono.append(n)
    checks.append(_check("hull_definition", hull_eq))
    checks.append(_check("hull_monotone", hull_mono))

    stats = []
    c1, c2, c4a, c4b, c4c, diam_bad, arcs_bad = [], [], [], [], [], [], []
    for p in dec.pieces:
        mem = sorted(p.members)
        idx = np.array(mem)
        sub_d = D[np.ix_(idx, idx)]
        diam = float(sub_d.max()) if len(mem) > 1 else 0.0
        pl = piece_leaves(tree, p.members)
        stats.append(
            {"n": p.level, "j": p.index, "size": len(mem), "diameter": diam, "bound": 2.0 ** (2 - p.level),
             "leaves": len(pl), "arcs": len(pl), "tree_leaves": len(p.members & leaf_set)}
        )
        if not is_connected(tree, p.members) or p.root not in p.members or not np.array_equal(
            A[np.ix_(idx, idx)], sub_d
        ):
            c1.append([p.level, p.index])
        if p.level >= 2:
            meet = p.members & dec.hulls[p.level - 1]
            if meet != {p.root}:
                c2.append([p.level, p.index, sorted(meet)])
        prev_hull = dec.hulls.get(p.level - 1, frozenset())
        fresh = nets.net(p.level) - nets.net(p.level - 1)
        if not pl <= (prev_hull | fresh):
            c4a.append([p.level, p.index, sorted(pl - prev_hull - fresh)])
        if not (pl & fresh) or not p.new_net_points or p.new_net_points != (p.members & fresh):
            c4b.append([p.level, p.index])
        if diam > 2.0 ** (2 - p.level):
            diam_bad.append([p.level, p.index, diam])
        arc_cap = len(nets.net(1)) if p.level == 1 else 1 + len(p.members & fresh)
        if len(pl) > arc_cap:
            arcs_bad.append([p.level, p.index, len(pl), arc_cap])

    c3_same, c3_cross = [], []
    pcs = dec.pieces
    for a in range(len(pcs)):
        for b in range(a + 1, len(pcs)):
            P, Q = pcs[a], pcs[b]
            common = P.members & Q.members
            if P.level == Q.level and common:
                c3_same.append([P.ref, Q.ref])
            elif len(common) > 1:
                c3_cross.append([P.ref, Q.ref, len(common)])
    for p in pcs:
        for q in p.members & leaf_set:
            others = [o.ref for o in pcs if o is not p and q in o.members]
            if others:
                c4c.append([p.ref, q, others])
    covered = set().union(*(p.members for p in pcs))
    c5 = sorted(set(range(tree.n_vertices)) - covered)

    single = len(pcs) == 1
    checks += [
        _check("piece_connected", c1),
        _check("piece_single_contact", c2, vacuous=single),
        _check("piece_overlap", c3_same + c3_cross, vacuous=single),
        _check("piece_leaves_in_nets", c4a),
        _check("piece_new_net_point", c4b),
        _check("piece_leaf_exclusive", c4c),
        _check("pieces_cover", c5),
        _check("piece_diameter", diam_bad),
        _check("piece_arc_count", arcs_bad),
    ]
    return {"pass": all(c["pass"] for c in checks), "checks": checks, "pieces": stats}


# ---------------------------------------------------------------------------
# traversals and the arc-intersection constant
# ---------------------------------------------------------------------------


def traversal(tree, dec, x, y):
    """Pieces traversed by ``path(x, y)``, entry points and valley index."""
    if x == y:
        raise ValueError("traversal needs distinct endpoints")
    verts = path(tree, x, y)
    refs, points = [], []
    last = None
    for u, v in zip(verts[:-1], verts[1:]):
        pc = dec.edge_piece(u, v)
        if pc != last:
            refs.append(dec.pieces[pc].ref)
            points.append(u)
            last = pc
    points.append(verts[-1])
    lv = [r[0] for r in refs]
    valley = int(np.argmin(lv))
    return Traversal(int(x), int(y), tuple(refs), tuple(int(p) for p in points), valley)


def valley_ok(levels, valley):
    """Strictly decreasing levels before ``valley``, strictly increasing from it."""
    for i in range(len(levels) - 1):
        if i < valley and not levels[i] > levels[i + 1]:
            return False
        if i >= valley and not levels[i] < levels[i + 1]:
            return False
    return True


def all_pairs(V):
    iu, ju = np.triu_indices(V, 1)
    return iu.astype(np.int64), ju.astype(np.int64)


def path_piece_counts(tree, dec, xs, ys):
    ptr, pcs = dec.adjacency_pieces
    return _kernels.path_piece_counts(xs, ys, tree.metric, tree.pred, ptr, pcs, dec.levels_array)


def compute_M(tree, dec):
    """Largest number of pieces of level <= n(x, y) that any path(x, y) meets."""
    if tree.n_vertices < 2:
        return 1
    xs, ys = all_pairs(tree.n_vertices)
    counts = path_piece_counts(tree, dec, xs, ys)
    return max(1, int(counts.max()))


def scale_index(d):
    """Largest ``n >= 0`` with ``d <= 2**-n``: the dyadic scale of a distance in (0, 1]."""
    return int(_kernels.scale_index(float(d)))
