"""Proximity graph on pieces and its greedy proper coloring."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class ProximityGraph:
    """Pieces ``(n, j)`` joined when within ``S * 2**-max(n, m)`` of each other."""

    S: float
    vertices: tuple
    edges: frozenset

    @cached_property
    def adjacency(self):
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {v: frozenset(n) for v, n in adj.items()}

    @property
    def max_degree(self):
        return max((len(n) for n in self.adjacency.values()), default=0)


@dataclass(frozen=True)
class Coloring:
    assignment: dict  # (n, j) -> color in 1..A
    A: int
    S: float

    def to_json(self):
        return {
            "S": self.S,
            "colors": {f"({n},{j})": c for (n, j), c in sorted(self.assignment.items())},
            "A": self.A,
        }

    @classmethod
    def from_json(cls, obj):
        colors = {}
        for key, c in obj["colors"].items():
            n, j = key.strip("()").split(",")
            colors[(int(n), int(j))] = int(c)
        return cls(colors, int(obj["A"]), float(obj["S"]))


def piece_distance(tree, P, Q):
    """Smallest distance between a member of ``P`` and a member of ``Q``."""
    a = np.fromiter(P.members, dtype=np.int64)
    b = np.fromiter(Q.members, dtype=np.int64)
    return float(tree.metric[np.ix_(a, b)].min())


def piece_distances(tree, dec):
    """Matrix of ``piece_distance`` over all pieces, in decomposition order."""
    k = len(dec.pieces)
    # min over members of P of d(., Q) computed once per piece Q
    to_piece = np.empty((k, tree.n_vertices))
    for i, p in enumerate(dec.pieces):
        to_piece[i] = tree.metric[np.fromiter(p.members, dtype=np.int64)].min(axis=0)
    out = np.zeros((k, k))
    for i, p in enumerate(dec.pieces):
        out[:, i] = to_piece[:, np.fromiter(p.members, dtype=np.int64)].min(axis=1)
    out = np.minimum(out, out.T)
    np.fill_diagonal(out, 0.0)
    return out


def build_graph(tree, dec, S):
    if S < 1:
        raise ValueError("S must be at least 1")
    dist = piece_distances(tree, dec)
    refs = tuple(p.ref for p in dec.pieces)
    lv = dec.levels_array
    edges = set()
    for a in range(len(refs)):
        for b in range(a + 1, len(refs)):
            if dist[a, b] <= S * 2.0 ** -max(lv[a], lv[b]):
                edges.add((refs[a], refs[b]))
    return ProximityGraph(float(S), refs, frozenset(edges))


def greedy_color(graph):
    """Color pieces in (level, index) order with the smallest free color."""
    adj = graph.adjacency
    colors = {}
    for v in sorted(graph.vertices):
        used = {colors[w] for w in adj[v] if w in colors}
        c = 1
        while c in used:
            c += 1
        colors[v] = c
    return Coloring(colors, max(colors.values(), default=0), graph.S)


def is_proper(graph, coloring):
    return all(coloring.assignment[a] != coloring.assignment[b] for a, b in graph.edges)
