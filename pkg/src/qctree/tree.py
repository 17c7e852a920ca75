"""Finite metric trees: paths, leaves, bounded turning and normalization."""
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from . import _kernels

TRIANGLE_SLACK = 1e-12


class TreeValidationError(ValueError):
    """Raised when a tree or its metric violates the required invariants."""


class MetricTree:
    """A finite combinatorial tree on vertices ``0..V-1`` with a metric.

    Parameters
    ----------
    n_vertices : int
    edges : iterable of (int, int)
        Exactly ``V - 1`` edges forming a spanning tree.
    metric : array_like, shape (V, V)
        Symmetric, zero on the diagonal, positive elsewhere, satisfying the
        triangle inequality up to ``TRIANGLE_SLACK``.

    Instances are immutable; derived data is computed lazily and cached.
    """

    def __init__(self, n_vertices, edges, metric, *, validate=True):
        V = int(n_vertices)
        if V < 1:
            raise TreeValidationError("a tree needs at least one vertex")
        E = tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in edges))
        D = np.array(metric, dtype=np.float64)
        D.setflags(write=False)
        self.n_vertices = V
        self.edges = E
        self.metric = D
        if validate:
            self._validate()

    def _validate(self):
        V, E, D = self.n_vertices, self.edges, self.metric
        if len(E) != V - 1:
            raise TreeValidationError(f"expected {V - 1} edges, got {len(E)}")
        for u, v in E:
            if not (0 <= u < V and 0 <= v < V) or u == v:
                raise TreeValidationError(f"bad edge ({u}, {v})")
        if len(set(E)) != len(E):
            raise TreeValidationError("duplicate edge")
        if V > 1:
            ncomp, _ = connected_components(self._csr, directed=False)
            if ncomp != 1:
                raise TreeValidationError("edges do not connect all vertices")
        if D.shape != (V, V):
            raise TreeValidationError(f"metric must be {V}x{V}, got {D.shape}")
        if not np.all(np.isfinite(D)):
            raise TreeValidationError("metric has non-finite entries")
        if not np.array_equal(D, D.T):
            raise TreeValidationError("metric is not symmetric")
        if np.any(np.diag(D) != 0.0):
            raise TreeValidationError("metric has nonzero diagonal")
        off = D[~np.eye(V, dtype=bool)]
        if np.any(off <= 0.0):
            raise TreeValidationError("metric has zero or negative distance between distinct vertices")
        if V > 2:
            worst, i, j, k = _kernels.triangle_worst(D)
            if worst > TRIANGLE_SLACK:
                raise TreeValidationError(
                    f"triangle inequality fails: d({i},{j}) exceeds d({i},{k}) + d({k},{j}) by {worst:.3e}"
                )

    @classmethod
    def from_edge_lengths(cls, n_vertices, edges, lengths):
        """Geodesic tree: d(x, y) is the sum of edge lengths along the path."""
        edges = [(int(u), int(v)) for u, v in edges]
        lengths = np.asarray(lengths, dtype=np.float64)
        if lengths.shape != (len(edges),):
            raise TreeValidationError("need one length per edge")
        if np.any(~np.isfinite(lengths)) or np.any(lengths <= 0):
            raise TreeValidationError("edge lengths must be positive and finite")
        V = int(n_vertices)
        if V == 1:
            return cls(1, [], np.zeros((1, 1)))
        if len(edges) != V - 1:
            raise TreeValidationError(f"expected {V - 1} edges, got {len(edges)}")
        u, v = np.array(edges).T
        W = csr_matrix((lengths, (u, v)), shape=(V, V))
        D = shortest_path(W, directed=False)
        if not np.all(np.isfinite(D)):
            raise TreeValidationError("edges do not connect all vertices")
        D = np.minimum(D, D.T)
        return cls(V, edges, D)

    # -- cached structure ------------------------------------------------

    @cached_property
    def _csr(self):
        V = self.n_vertices
        if not self.edges:
            return csr_matrix((V, V))
        u, v = np.array(self.edges).T
        return csr_matrix((np.ones(len(u)), (u, v)), shape=(V, V))

    @cached_property
    def neighbors(self):
        nbrs = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        return tuple(tuple(sorted(n)) for n in nbrs)

    @cached_property
    def degree(self):
        return np.array([len(n) for n in self.neighbors], dtype=np.int64)

    @cached_property
    def _hops_pred(self):
        V = self.n_vertices
        if V == 1:
            return np.zeros((1, 1), np.int64), np.full((1, 1), -9999, np.int64)
        H, P = shortest_path(self._csr, directed=False, unweighted=True, return_predecessors=True)
        H = H.astype(np.int64)
        P = P.astype(np.int64)
        H.setflags(write=False)
        P.setflags(write=False)
        return H, P

    @property
    def hops(self):
        """Hop count between every pair of vertices."""
        return self._hops_pred[0]

    @property
    def pred(self):
        """``pred[x, y]`` is the neighbour of ``y`` on the path towards ``x``."""
        return self._hops_pred[1]

    @cached_property
    def parent(self):
        """Parent of each vertex when rooted at vertex 0 (-1 for the root)."""
        par = self.pred[0].copy()
        par[0] = -1
        return par

    @cached_property
    def arc_diameters(self):
        """``arc_diameters[x, y] = max d(u, v)`` over u, v on ``path(x, y)``."""
        if self.n_vertices == 1:
            return np.zeros((1, 1))
        A = _kernels.arc_diameters(self.metric, self.pred, self.hops)
        A.setflags(write=False)
        return A

    @cached_property
    def turning_constant(self):
        """Max of ``arc_diameter(x, y) / d(x, y)`` over distinct pairs (1 for V = 1)."""
        V = self.n_vertices
        if V == 1:
            return 1.0
        iu = np.triu_indices(V, 1)
        return max(1.0, float(np.max(self.arc_diameters[iu] / self.metric[iu])))

    @cached_property
    def normalized(self):
        """True when the metric is 1-bounded turning and has diameter exactly 1."""
        if self.n_vertices == 1:
            return True
        return bool(np.max(self.metric) == 1.0 and np.array_equal(self.arc_diameters, self.metric))

    @property
    def diameter(self):
        return float(np.max(self.metric))

    def __eq__(self, other):
        if not isinstance(other, MetricTree):
            return NotImplemented
        return (
            self.n_vertices == other.n_vertices
            and self.edges == other.edges
            and np.array_equal(self.metric, other.metric)
        )

    __hash__ = None

    def __repr__(self):
        return f"MetricTree(V={self.n_vertices}, diam={self.diameter:.6g})"

    def check_vertex(self, x):
        if not (isinstance(x, (int, np.integer)) and 0 <= x < self.n_vertices):
            raise IndexError(f"invalid vertex id {x!r} for tree with {self.n_vertices} vertices")
        return int(x)


def path(tree, x, y):
    """The unique tree path from ``x`` to ``y`` as a tuple of vertex ids."""
    x, y = tree.check_vertex(x), tree.check_vertex(y)
    P = tree.pred
    out = [y]
    w = y
    while w != x:
        w = int(P[x, w])
        out.append(w)
    out.reverse()
    return tuple(out)


def arc_diameter(tree, x, y):
    x, y = tree.check_vertex(x), tree.check_vertex(y)
    return float(tree.arc_diameters[x, y])


def leaves(tree):
    """Degree-one vertices; a single-vertex tree is its own leaf."""
    if tree.n_vertices == 1:
        return frozenset({0})
    return frozenset(int(v) for v in np.flatnonzero(tree.degree == 1))


def turning_constant(tree):
    return tree.turning_constant


def normalize(tree):
    """Replace d by the arc-diameter metric and rescale to diameter 1.

    The arc-diameter metric is 1-bounded turning and satisfies
    ``d <= d' <= C d`` with C the turning constant of the input.
    """
    if tree.n_vertices < 2:
        raise TreeValidationError("normalize needs at least two vertices")
    A = np.array(tree.arc_diameters)
    A /= A.max()
    A = np.minimum(A, A.T)
    return MetricTree(tree.n_vertices, tree.edges, A)


def gate(tree, x, K):
    """The vertex of the connected set ``K`` through which ``x`` reaches all of it."""
    x = tree.check_vertex(x)
    K = frozenset(int(k) for k in K)
    if not K:
        raise ValueError("gate needs a nonempty vertex set")
    for k in K:
        tree.check_vertex(k)
    if not is_connected(tree, K):
        raise ValueError("gate needs a connected vertex set")
    if x in K:
        return x
    q = min(K)
    P = tree.pred
    w = x
    while w not in K:
        w = int(P[q, w])
    return w


def is_connected(tree, K):
    """Whether the vertex set ``K`` induces a connected subtree."""
    K = set(K)
    if not K:
        return False
    start = next(iter(K))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in tree.neighbors[u]:
            if v in K and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(K)


def doubling_estimate(tree, n_max=None):
    """Greedy estimate of the doubling constant over dyadic radii.

    For every radius ``r = 2**-k`` (k = 1..n_max) and every vertex centre,
    ``B(c, r)`` is covered greedily by closed balls of radius ``r/2`` centred
    at vertices, each time choosing the centre that covers the most uncovered
    points (ties to the smallest id).  Returns the largest cover size.
    """
    V = tree.n_vertices
    if V == 1:
        return 1
    D = tree.metric
    if n_max is None:
        dmin = float(np.min(D[~np.eye(V, dtype=bool)]))
        n_max = max(1, int(np.ceil(-np.log2(dmin))) + 1)
    best = 1
    for k in range(1, n_max + 1):
        r = 2.0**-k
        half = D <= r / 2
        for c in range(V):
            uncovered = D[c] <= r
            count = 0
            while uncovered.any():
                gain = half[:, uncovered].sum(axis=1)
                s = int(np.argmax(gain))
                uncovered &= ~half[s]
                count += 1
            best = max(best, count)
    return best
