"""Brute-force reference implementations for small trees.

Only the metric matrix and the edge list of a tree are read; paths, hulls,
pieces, M and traversals are recomputed by naive enumeration.
"""
from itertools import combinations


def adjacency(tree):
    adj = {v: set() for v in range(tree.n_vertices)}
    for u, v in tree.edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def naive_path(adj, x, y):
    """Depth-first search for the unique simple path."""
    stack = [(x, [x])]
    while stack:
        u, trail = stack.pop()
        if u == y:
            return trail
        for w in sorted(adj[u]):
            if w not in trail:
                stack.append((w, trail + [w]))
    raise AssertionError("disconnected")


def naive_leaves(adj):
    if len(adj) == 1:
        return {0}
    return {v for v, nb in adj.items() if len(nb) == 1}


def naive_nets(tree):
    """Greedy farthest-point nets, continued level to level."""
    D = tree.metric
    lv = sorted(naive_leaves(adjacency(tree)))
    chosen = [lv[0]]
    levels = []
    n = 1
    while True:
        while True:
            best, best_d = None, -1.0
            for q in lv:
                dq = min(D[q][c] for c in chosen)
                if dq > best_d:
                    best, best_d = q, dq
            if best_d < 2.0**-n:
                break
            chosen.append(best)
        levels.append(set(chosen))
        if len(chosen) == len(lv):
            return levels
        n += 1


def naive_hull(adj, pts):
    out = set(pts)
    for x, y in combinations(sorted(pts), 2):
        out.update(naive_path(adj, x, y))
    return out


def naive_pieces(tree, levels):
    """List of (n, j, root, members), attaching each new vertex by its gate."""
    adj = adjacency(tree)
    hulls = [naive_hull(adj, L) for L in levels]
    pieces = [(1, 1, min(levels[0]), set(hulls[0]))]
    for n in range(2, len(levels) + 1):
        prev, cur = hulls[n - 2], hulls[n - 1]
        groups = {}
        for v in cur - prev:
            # nearest vertex of prev along the tree
            trail = min((naive_path(adj, v, p) for p in prev), key=len)
            groups.setdefault(trail[-1], set()).add(v)
        items = sorted((min(m | {r}), r, m | {r}) for r, m in groups.items())
        for j, (_, r, m) in enumerate(items, start=1):
            pieces.append((n, j, r, m))
    return hulls, pieces


def scale(d):
    n = 0
    while d <= 2.0 ** -(n + 1):
        n += 1
    return n


def naive_M(tree, pieces):
    adj = adjacency(tree)
    best = 1
    for x, y in combinations(range(tree.n_vertices), 2):
        n = scale(tree.metric[x][y])
        pth = set(naive_path(adj, x, y))
        count = sum(1 for (lvl, _, _, m) in pieces if lvl <= n and m & pth)
        best = max(best, count)
    return best


def naive_traversal(tree, pieces, x, y):
    """(piece refs, points, valley) along path(x, y)."""
    adj = adjacency(tree)
    pth = naive_path(adj, x, y)
    refs, points = [], []
    for u, v in zip(pth[:-1], pth[1:]):
        owners = [(n, j) for (n, j, _, m) in pieces if u in m and v in m]
        assert len(owners) == 1
        if not refs or refs[-1] != owners[0]:
            refs.append(owners[0])
            points.append(u)
    points.append(y)
    lv = [r[0] for r in refs]
    valley = lv.index(min(lv)) if lv else 0
    return refs, points, valley
