"""Corpus trees: stars, paths, fractal arcs, snowflaked paths, Vicsek trees."""
from dataclasses import dataclass, field

import numpy as np

from .tree import MetricTree, normalize

KINDS = ("star", "path", "random_tree", "koch_arc", "snowflake_path", "vicsek")
MIN_ALPHA = 0.4


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj):
        obj = dict(obj)
        kind = obj.pop("kind")
        return cls(kind, obj)

    def to_json(self):
        return {"kind": self.kind, **self.params}


def _euclidean(points):
    P = np.asarray(points, dtype=np.float64)
    return np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(axis=2))


def star_tree(k=3, legs=0.5, samples=5):
    """``k`` geodesic legs from a centre, each sampled at ``samples`` vertices."""
    if k < 1 or samples < 1:
        raise ValueError("star needs k >= 1 and samples >= 1")
    lengths = np.broadcast_to(np.asarray(legs, dtype=np.float64), (k,))
    if np.any(lengths <= 0):
        raise ValueError("leg lengths must be positive")
    edges, lens = [], []
    V = 1
    for leg in lengths:
        prev = 0
        for _ in range(samples):
            edges.append((prev, V))
            lens.append(leg / samples)
            prev = V
            V += 1
    return MetricTree.from_edge_lengths(V, edges, lens)


def path_tree(n=17):
    """Uniformly spaced geodesic path on ``n`` vertices."""
    if n < 2:
        raise ValueError("path needs at least two vertices")
    return MetricTree.from_edge_lengths(n, [(i, i + 1) for i in range(n - 1)], np.ones(n - 1))


def koch_polyline(depth=3):
    """Vertices of the depth-``depth`` Koch curve from (0, 0) to (1, 0)."""
    if not 0 <= depth <= 6:
        raise ValueError("koch depth must be in 0..6")
    pts = np.array([0.0 + 0.0j, 1.0 + 0.0j])
    rot = np.exp(1j * np.pi / 3)
    for _ in range(depth):
        a, b = pts[:-1], pts[1:]
        s = (b - a) / 3
        new = np.empty(4 * len(a) + 1, dtype=complex)
        new[0:-1:4] = a
        new[1::4] = a + s
        new[2::4] = a + s + s * rot
        new[3::4] = a + 2 * s
        new[-1] = pts[-1]
        pts = new
    return np.column_stack([pts.real, pts.imag])


def koch_arc(depth=3):
    """Koch polyline as a path tree with the planar Euclidean metric."""
    P = koch_polyline(depth)
    n = len(P)
    return MetricTree(n, [(i, i + 1) for i in range(n - 1)], _euclidean(P))


def snowflake_path(alpha=0.7, n=65, allow_small_alpha=False):
    """Path on ``n`` vertices with ``d(u, v) = |u - v|**alpha``."""
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if alpha < MIN_ALPHA and not allow_small_alpha:
        raise ValueError(f"alpha below {MIN_ALPHA} needs allow_small_alpha=True")
    if n < 2:
        raise ValueError("snowflake path needs at least two vertices")
    i = np.arange(n, dtype=np.float64)
    D = np.abs(i[:, None] - i[None, :]) ** alpha
    return MetricTree(n, [(k, k + 1) for k in range(n - 1)], D)


def vicsek_points(depth=2):
    """Vertices (integer lattice) and edges of the depth-``depth`` Vicsek cross."""
    if not 0 <= depth <= 4:
        raise ValueError("vicsek depth must be in 0..4")
    crosses = [((0, 0), 3**depth)]
    for _ in range(depth):
        nxt = []
        for (cx, cy), h in crosses:
            t = h // 3
            for dx, dy in ((0, 0), (2 * t, 0), (-2 * t, 0), (0, 2 * t), (0, -2 * t)):
                nxt.append(((cx + dx, cy + dy), t))
        crosses = nxt
    index = {}
    edges = []

    def vid(p):
        if p not in index:
            index[p] = len(index)
        return index[p]

    for (cx, cy), h in sorted(crosses):
        c = vid((cx, cy))
        for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)):
            edges.append((c, vid((cx + dx, cy + dy))))
    pts = np.array(sorted(index, key=index.get), dtype=np.float64)
    return pts, edges


def vicsek(depth=2):
    P, edges = vicsek_points(depth)
    return MetricTree(len(P), edges, _euclidean(P))


def random_tree(n=50, seed=0, min_length=0.1, max_length=1.0):
    """Random recursive tree with uniform random edge lengths (geodesic)."""
    if n < 2:
        raise ValueError("random tree needs at least two vertices")
    rng = np.random.default_rng(seed)
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    lengths = rng.uniform(min_length, max_length, size=n - 1)
    return MetricTree.from_edge_lengths(n, [(p, i + 1) for i, p in enumerate(parents)], lengths)


_RAW = {
    "star": star_tree,
    "path": path_tree,
    "koch_arc": koch_arc,
    "snowflake_path": snowflake_path,
    "vicsek": vicsek,
    "random_tree": random_tree,
}


def generate_raw(spec):
    if spec.kind not in _RAW:
        raise ValueError(f"unknown generator kind {spec.kind!r}; expected one of {KINDS}")
    try:
        return _RAW[spec.kind](**spec.params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {spec.kind}: {exc}") from None


def generate(spec=None, **kwargs):
    """Normalized corpus tree.  Accepts a ``GeneratorSpec`` or ``kind=..., **params``."""
    if spec is None:
        spec = GeneratorSpec(kwargs.pop("kind"), kwargs)
    return normalize(generate_raw(spec))
