"""Certified (1, L)-bi-Lipschitz embeddings of single pieces.

Each piece is placed in R^d with its root at the origin and scaled so the
smallest ratio ``|f(u) - f(v)| / d(u, v)`` over member pairs is 1; the
largest ratio is the certified constant ``L`` of that piece.  Outside the
piece the map is extended by the value at the gate vertex, so it is
constant on every component of the complement.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

logger = logging.getLogger(__name__)

STRATEGIES = ("stress_certify", "geodesic_axes")
MAX_DIM = 8


class EmbeddingFailure(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class LocalEmbedConfig:
    d: int = 3
    max_iterations: int = 2000
    L_cap: float = 64.0
    strategy: str = "stress_certify"
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if not self.L_cap > 1:
            raise ValueError("L_cap must exceed 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True, eq=False)
class LocalEmbedding:
    ref: tuple
    members: tuple  # sorted vertex ids
    coords: np.ndarray = field(repr=False)  # (len(members), d)
    L: float
    lower: float
    strategy: str = "stress_certify"

    @property
    def d(self):
        return self.coords.shape[1]

    @cached_property
    def row(self):
        return {v: i for i, v in enumerate(self.members)}

    def point(self, v):
        return self.coords[self.row[v]]

    def padded(self, d):
        """The same embedding composed with the inclusion R^self.d -> R^d."""
        if d == self.d:
            return self
        if d < self.d:
            raise ValueError("cannot pad to a smaller dimension")
        X = np.zeros((len(self.members), d))
        X[:, : self.d] = self.coords
        return LocalEmbedding(self.ref, self.members, X, self.L, self.lower, self.strategy)

    def to_json(self):
        return {
            "n": self.ref[0],
            "j": self.ref[1],
            "d": self.d,
            "L": self.L,
            "coords": {str(v): [float(c) for c in self.coords[i]] for i, v in enumerate(self.members)},
        }

    @classmethod
    def from_json(cls, obj, piece_metric=None):
        members = tuple(sorted(int(v) for v in obj["coords"]))
        d = int(obj["d"])
        X = np.array([obj["coords"][str(v)] for v in members], dtype=np.float64).reshape(len(members), d)
        lower = certify_coords(X, piece_metric)[0] if piece_metric is not None else float("nan")
        return cls((int(obj["n"]), int(obj["j"])), members, X, float(obj["L"]), lower)


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


def certify_coords(X, Dp):
    """Exhaustive (min, max) of ``|X[u] - X[v]| / Dp[u, v]`` over pairs u < v."""
    n = X.shape[0]
    if n < 2:
        return 1.0, 1.0
    iu, ju = np.triu_indices(n, 1)
    r = np.linalg.norm(X[iu] - X[ju], axis=1) / Dp[iu, ju]
    return float(r.min()), float(r.max())


def certify(emb, tree):
    idx = np.array(emb.members)
    return certify_coords(emb.coords, tree.metric[np.ix_(idx, idx)])


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


def _classical_mds(Dp, d):
    n = Dp.shape[0]
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (Dp**2) @ J
    w, V = np.linalg.eigh(B)
    order = np.argsort(w)[::-1][:d]
    w = np.clip(w[order], 0.0, None)
    X = np.zeros((n, d))
    X[:, : len(order)] = V[:, order] * np.sqrt(w)
    return X


def _soft_distortion(x, n, d, logd, mask, beta):
    """Smoothed ``log max ratio - log min ratio`` and its gradient."""
    X = x.reshape(n, d)
    diff = X[:, None, :] - X[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    sq[~mask] = 1.0
    lr = 0.5 * np.log(sq) - logd
    v = lr[mask]
    a = beta * v
    am = a.max()
    wp = np.exp(a - am)
    sp = wp.sum()
    b = -a
    bm = b.max()
    wm = np.exp(b - bm)
    sm = wm.sum()
    F = (am + np.log(sp) + bm + np.log(sm)) / beta
    C = np.zeros((n, n))
    C[mask] = (wp / sp - wm / sm) / sq[mask]
    C = C + C.T
    G = C.sum(axis=1)[:, None] * X - C @ X
    return F, G.ravel()


def _stress_certify(Dp, d, max_iterations, rng):
    n = Dp.shape[0]
    diam = Dp.max()
    X0 = _classical_mds(Dp, d)
    # the unperturbed start is a candidate too: exact for Euclidean inputs
    best, best_dist = X0, np.inf
    lo, hi = certify_coords(X0, Dp)
    if lo > 0:
        best_dist = hi / lo
    X = X0 + rng.normal(scale=1e-3 * diam, size=X0.shape)
    mask = np.triu(np.ones((n, n), dtype=bool), 1)
    logd = np.log(np.where(mask, Dp, 1.0))
    betas = (8.0, 32.0, 128.0, 512.0, 2048.0)
    per_stage = max(1, max_iterations // len(betas))
    for beta in betas:
        res = minimize(
            _soft_distortion, X.ravel(), args=(n, d, logd, mask, beta), jac=True,
            method="L-BFGS-B", options={"maxiter": per_stage},
        )
        X = res.x.reshape(n, d)
        lo, hi = certify_coords(X, Dp)
        if lo > 0 and hi / lo < best_dist:
            best, best_dist = X.copy(), hi / lo
    return best


def _is_additive(tree, members, Dp):
    idx = list(members)
    pos = {v: i for i, v in enumerate(idx)}
    rows, cols, vals = [], [], []
    for u in idx:
        for w in tree.neighbors[u]:
            if w in pos and u < w:
                rows.append(pos[u])
                cols.append(pos[w])
                vals.append(tree.metric[u, w])
    G = shortest_path(csr_matrix((vals, (rows, cols)), shape=(len(idx), len(idx))), directed=False)
    return np.allclose(G, Dp, rtol=1e-12, atol=0.0)


def _geodesic_axes(tree, members, root, d):
    """Lay each root-to-leaf branch along its own coordinate axis.

    Returns None when the piece has more branches than axes.
    """
    pos = {v: i for i, v in enumerate(members)}
    X = np.zeros((len(members), d))
    axis_of = {root: -1}
    next_axis = 0
    stack = [root]
    seen = {root}
    while stack:
        u = stack.pop()
        kids = [w for w in tree.neighbors[u] if w in pos and w not in seen]
        for k, w in enumerate(kids):
            if k == 0 and axis_of[u] >= 0:
                ax = axis_of[u]
            else:
                ax = next_axis
                next_axis += 1
                if ax >= d:
                    return None
            axis_of[w] = ax
            X[pos[w]] = X[pos[u]]
            X[pos[w], ax] += tree.metric[u, w]
            seen.add(w)
            stack.append(w)
    return X


def _finish(X, Dp, root_row):
    lo, _ = certify_coords(X, Dp)
    X = X / lo
    X = X - X[root_row]
    lower, upper = certify_coords(X, Dp)
    return X, lower, upper


def piece_rng(seed, ref):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(ref[0]), int(ref[1])]))


def embed_piece(tree, piece, config=LocalEmbedConfig()):
    """Certified embedding of one piece into R^d with its root at the origin.

    Raises ``EmbeddingFailure`` when no dimension up to 8 reaches
    ``L <= config.L_cap``.
    """
    members = tuple(sorted(piece.members))
    idx = np.array(members)
    Dp = tree.metric[np.ix_(idx, idx)]
    root_row = members.index(piece.root)
    n = len(members)
    if n == 1:
        return LocalEmbedding(piece.ref, members, np.zeros((1, config.d)), 1.0, 1.0, config.strategy)
    if n == 2:
        X = np.zeros((2, config.d))
        X[1 - root_row, 0] = Dp[0, 1]
        lower, upper = certify_coords(X, Dp)
        return LocalEmbedding(piece.ref, members, X, upper, lower, config.strategy)

    if config.strategy == "geodesic_axes" and _is_additive(tree, members, Dp):
        for d in range(config.d, MAX_DIM + 1):
            X = _geodesic_axes(tree, members, piece.root, d)
            if X is not None:
                X, lower, upper = _finish(X, Dp, root_row)
                if upper <= config.L_cap:
                    return LocalEmbedding(piece.ref, members, X, upper, lower, "geodesic_axes")
        logger.info("piece %s: geodesic_axes needs more than %d axes, using stress_certify", piece.ref, MAX_DIM)

    rng = piece_rng(config.seed, piece.ref)
    tried = []
    for d in range(config.d, max(config.d, MAX_DIM) + 1):
        X = _stress_certify(Dp, d, config.max_iterations, rng)
        X, lower, upper = _finish(X, Dp, root_row)
        tried.append((d, upper))
        if upper <= config.L_cap:
            return LocalEmbedding(piece.ref, members, X, upper, lower, "stress_certify")
    raise EmbeddingFailure(
        f"piece {piece.ref} could not be certified below L_cap={config.L_cap}",
        {"piece": piece.ref, "size": n, "attempts": tried},
    )


# ---------------------------------------------------------------------------
# extension to the whole tree
# ---------------------------------------------------------------------------


def extension_gates(tree, piece):
    """For every vertex, its gate into ``piece`` (itself for members)."""
    gates = np.full(tree.n_vertices, -1, dtype=np.int64)
    queue = deque(sorted(piece.members))
    for m in queue:
        gates[m] = m
    while queue:
        u = queue.popleft()
        for w in tree.neighbors[u]:
            if gates[w] < 0:
                gates[w] = gates[u]
                queue.append(w)
    return gates


def extended_coords(tree, piece, emb, gates=None):
    """(V, d) array of extended values of ``emb`` at every vertex."""
    if gates is None:
        gates = extension_gates(tree, piece)
    rows = np.array([emb.row[g] for g in gates])
    return emb.coords[rows]


def extend_value(tree, piece, emb, x):
    """Value at ``x`` of the extension: the coordinates of its gate."""
    x = tree.check_vertex(x)
    if x in piece.members:
        return emb.point(x).copy()
    return emb.point(int(extension_gates(tree, piece)[x])).copy()
