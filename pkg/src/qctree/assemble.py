"""Constant selection and assembly of the global embedding.

The global map is the sum over all pieces of their extended local maps,
each written into the coordinate block of its color:
block ``c`` (1-based) occupies columns ``[(c - 1) d, c d)``.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .local import extended_coords, extension_gates
from .nets import traversal
from .tree import path


@dataclass(frozen=True)
class GlobalConstants:
    L: float
    M: int
    N: int
    S: float
    A: int
    d: int
    lower: float
    upper: float

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, obj):
        return cls(float(obj["L"]), int(obj["M"]), int(obj["N"]), float(obj["S"]), int(obj["A"]),
                   int(obj["d"]), float(obj["lower"]), float(obj["upper"]))

    def line(self):
        return (f"L={self.L:.6f} M={self.M} N={self.N} S={self.S:g} A={self.A} d={self.d} "
                f"lower={self.lower:.6e} upper={self.upper:.6f}")


def lower_constant(L, M, N):
    return 1.0 / (2.0 * math.sqrt(2 * N + M + 1)) - L * 2.0 ** (3 - N)


def upper_constant(L, M):
    # middle band <= M * L d(x, y); each tail <= L * 2**(2-n) <= 8 L d(x, y)
    return L * (M + 17)


def choose_N(L, M):
    """Smallest positive N with ``1/(2 sqrt(2N + M + 1)) - L 2**(3-N) > 0``."""
    if L < 1 or M < 1:
        raise ValueError("need L >= 1 and M >= 1")
    N = 1
    while not lower_constant(L, M, N) > 0:
        N += 1
    return N


def choose_constants(L, M, A, d, N=None):
    """Fill in all constants; ``N`` overrides the automatic choice when given."""
    if N is None:
        N = choose_N(L, M)
    elif N < 1:
        raise ValueError("N must be positive")
    return GlobalConstants(float(L), int(M), int(N), float(2.0**N), int(A), int(d),
                           lower_constant(L, M, N), upper_constant(L, M))


@dataclass(frozen=True, eq=False)
class GlobalEmbedding:
    coords: np.ndarray = field(repr=False)  # (V, A * d)
    constants: GlobalConstants
    colors: dict  # (n, j) -> color
    locals: dict = field(repr=False)  # (n, j) -> LocalEmbedding

    @property
    def dimension(self):
        return self.coords.shape[1]

    def block(self, color):
        d = self.constants.d
        return slice((color - 1) * d, color * d)


def assemble(tree, dec, coloring, local_embeddings, constants):
    """Sum every piece's extended local map into its color block."""
    if coloring.S != constants.S:
        raise ValueError(f"coloring was built for S={coloring.S}, constants have S={constants.S}")
    if coloring.A != constants.A:
        raise ValueError("coloring and constants disagree on the number of colors")
    d = constants.d
    F = np.zeros((tree.n_vertices, constants.A * d))
    for p in dec.pieces:
        emb = local_embeddings[p.ref]
        if emb.d != d:
            raise ValueError(f"piece {p.ref} embedded in dimension {emb.d}, expected {d}")
        c = coloring.assignment[p.ref]
        F[:, (c - 1) * d : c * d] += extended_coords(tree, p, emb)
    return GlobalEmbedding(F, constants, dict(coloring.assignment), dict(local_embeddings))


def evaluate_path_sum(tree, dec, embedding, x):
    """f(x) summed only over pieces traversed by the path from the base root."""
    r = dec.base_root
    d = embedding.constants.d
    out = np.zeros(embedding.dimension)
    if x == r:
        return out
    refs = set(traversal(tree, dec, r, x).pieces)
    for p in dec.pieces:
        if p.ref not in refs:
            continue
        emb = embedding.locals[p.ref]
        c = embedding.colors[p.ref]
        g = int(extension_gates(tree, p)[x])
        out[(c - 1) * d : c * d] += emb.point(g)
    return out


def telescoping_check(tree, dec, embedding, x, y):
    """Norm of ``f(x) - f(y) - sum_i (f(p_i) - f(p_{i+1}))`` along the traversal."""
    F = embedding.coords
    pts = traversal(tree, dec, x, y).points
    total = np.zeros(F.shape[1])
    for a, b in zip(pts[:-1], pts[1:]):
        total += F[a] - F[b]
    return float(np.linalg.norm((F[x] - F[y]) - total))


def traversed_from_root(tree, dec):
    """For each vertex, the set of piece indices traversed by the path from the base root."""
    r = dec.base_root
    out = []
    for x in range(tree.n_vertices):
        verts = path(tree, r, x)
        out.append({dec.edge_piece(u, v) for u, v in zip(verts[:-1], verts[1:])})
    return out
