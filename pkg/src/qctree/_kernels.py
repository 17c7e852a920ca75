"""Hot loops over vertex pairs.

Every public function here dispatches on ``USE_NUMBA``: the loop kernels are
compiled with numba, otherwise a vectorized numpy version is used when one
exists and the loop code runs as plain Python when it does not.  Both paths
return identical results.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._accel import USE_NUMBA, jit

# ---------------------------------------------------------------------------
# scale index
# ---------------------------------------------------------------------------


@jit
def scale_index(d):
    """Largest n >= 0 with d <= 2**-n, for 0 < d <= 1."""
    n = 0
    t = 1.0
    while d <= 0.5 * t:
        t *= 0.5
        n += 1
    return n


# ---------------------------------------------------------------------------
# arc diameters
# ---------------------------------------------------------------------------


@jit
def _arc_diameters_loops(D, P, H):
    V = D.shape[0]
    out = np.zeros((V, V))
    maxh = 0
    for i in range(V):
        for j in range(i + 1, V):
            if H[i, j] > maxh:
                maxh = H[i, j]
    counts = np.zeros(maxh + 2, np.int64)
    for i in range(V):
        for j in range(i + 1, V):
            counts[H[i, j] + 1] += 1
    for h in range(1, maxh + 2):
        counts[h] += counts[h - 1]
    npairs = V * (V - 1) // 2
    bx = np.empty(npairs, np.int64)
    by = np.empty(npairs, np.int64)
    fill = counts.copy()
    for i in range(V):
        for j in range(i + 1, V):
            h = H[i, j]
            bx[fill[h]] = i
            by[fill[h]] = j
            fill[h] += 1
    for k in range(npairs):
        x = bx[k]
        y = by[k]
        v = D[x, y]
        if H[x, y] > 1:
            a = out[x, P[x, y]]
            b = out[P[y, x], y]
            if a > v:
                v = a
            if b > v:
                v = b
        out[x, y] = v
        out[y, x] = v
    return out


def _arc_diameters_numpy(D, P, H):
    V = D.shape[0]
    out = np.zeros((V, V))
    iu, ju = np.triu_indices(V, 1)
    hv = H[iu, ju]
    for h in range(1, int(hv.max(initial=0)) + 1):
        sel = hv == h
        x, y = iu[sel], ju[sel]
        v = D[x, y]
        if h > 1:
            v = np.maximum(v, np.maximum(out[x, P[x, y]], out[P[y, x], y]))
        out[x, y] = v
        out[y, x] = v
    return out


def arc_diameters(D, P, H):
    """Matrix of max d(u, v) over u, v on the tree path between each pair.

    Uses ``ad(x, y) = max(ad(x, y'), ad(x', y), d(x, y))`` where ``x'`` and
    ``y'`` are the path neighbours of ``x`` and ``y``, processed by hop count.
    """
    D = np.ascontiguousarray(D, dtype=np.float64)
    P = np.ascontiguousarray(P, dtype=np.int64)
    H = np.ascontiguousarray(H, dtype=np.int64)
    if USE_NUMBA:
        return _arc_diameters_loops(D, P, H)
    return _arc_diameters_numpy(D, P, H)


# ---------------------------------------------------------------------------
# triangle inequality
# ---------------------------------------------------------------------------


@jit
def _triangle_worst_loops(D):
    V = D.shape[0]
    worst = 0.0
    wi = -1
    wj = -1
    wk = -1
    for k in range(V):
        for i in range(V):
            dik = D[i, k]
            # both orders: rounding differs between (i, j) and (j, i)
            for j in range(V):
                excess = D[i, j] - dik - D[k, j]
                if excess > worst:
                    worst = excess
                    wi = min(i, j)
                    wj = max(i, j)
                    wk = k
    return worst, wi, wj, wk


def _triangle_worst_numpy(D):
    worst, witness = 0.0, (-1, -1, -1)
    for k in range(D.shape[0]):
        excess = D - D[:, k : k + 1] - D[k : k + 1, :]
        i, j = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[i, j] > worst:
            worst, witness = float(excess[i, j]), (int(min(i, j)), int(max(i, j)), k)
    return (worst,) + witness


def triangle_worst(D):
    """Largest ``d(i,j) - d(i,k) - d(k,j)`` and its witness ``(i, j, k)``."""
    D = np.ascontiguousarray(D, dtype=np.float64)
    if USE_NUMBA:
        w, i, j, k = _triangle_worst_loops(D)
        return float(w), int(i), int(j), int(k)
    return _triangle_worst_numpy(D)


# ---------------------------------------------------------------------------
# pair ratios
# ---------------------------------------------------------------------------


@jit
def _pair_ratios_loops(F, D, xs, ys):
    out = np.empty(xs.shape[0])
    dim = F.shape[1]
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        s = 0.0
        for c in range(dim):
            t = F[x, c] - F[y, c]
            s += t * t
        out[k] = np.sqrt(s) / D[x, y]
    return out


def _pair_ratios_numpy(F, D, xs, ys, chunk=1 << 16):
    out = np.empty(xs.shape[0])
    for s in range(0, xs.shape[0], chunk):
        x, y = xs[s : s + chunk], ys[s : s + chunk]
        out[s : s + chunk] = np.linalg.norm(F[x] - F[y], axis=1) / D[x, y]
    return out


def pair_ratios(F, D, xs, ys):
    """``|F[x] - F[y]| / D[x, y]`` for each listed pair."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    D = np.ascontiguousarray(D, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    if USE_NUMBA:
        return _pair_ratios_loops(F, D, xs, ys)
    return _pair_ratios_numpy(F, D, xs, ys)


# ---------------------------------------------------------------------------
# pieces met by a path at or below the pair's scale
# ---------------------------------------------------------------------------


@jit
def _path_piece_counts(xs, ys, D, P, adj_ptr, adj_piece, levels):
    npieces = levels.shape[0]
    stamp = np.full(npieces, -1, np.int64)
    out = np.zeros(xs.shape[0], np.int64)
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        n = scale_index(D[x, y])
        count = 0
        w = y
        while True:
            for e in range(adj_ptr[w], adj_ptr[w + 1]):
                pc = adj_piece[e]
                if levels[pc] <= n and stamp[pc] != k:
                    stamp[pc] = k
                    count += 1
            if w == x:
                break
            w = P[x, w]
        out[k] = count
    return out


def path_piece_counts(xs, ys, D, P, adj_ptr, adj_piece, levels):
    """Distinct pieces of level <= n(x, y) meeting the path, per pair."""
    return _path_piece_counts(
        np.ascontiguousarray(xs, dtype=np.int64),
        np.ascontiguousarray(ys, dtype=np.int64),
        np.ascontiguousarray(D, dtype=np.float64),
        np.ascontiguousarray(P, dtype=np.int64),
        np.ascontiguousarray(adj_ptr, dtype=np.int64),
        np.ascontiguousarray(adj_piece, dtype=np.int64),
        np.ascontiguousarray(levels, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# traversal / band sweep
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = (
    "n",  # scale index of the pair
    "coarse",  # d(x, y) > 1/2
    "n_traversed",
    "valley_index",  # 0-based i0
    "valley_ok",
    "low_gap",  # i^* - i_*
    "band_gap",  # over - under
    "tail_low",  # sum of d(p_i, p_{i+1}) for i < under
    "tail_high",  # same for i > over
    "telescope_residual",
    "f_dist",  # |f(x) - f(y)|
    "increments_ok",
    "support_ok",
    "orthogonal_ok",
    "mid_norm",  # |sum of middle-band increments|
    "mid_pyth",  # sqrt(sum |increment|^2) over the middle band
    "mid_dist_l2",  # sqrt(sum d(p_i, p_{i+1})^2) over the middle band
    "mid_dist_sum",
    "tail_f",  # sum of |increment| outside the middle band
    "dist",
)
COL = {name: i for i, name in enumerate(SWEEP_COLUMNS)}


@jit
def _sweep(xs, ys, D, P, parent0, up_piece, levels, colors, F, dblock, L, N, out):
    V = D.shape[0]
    dim = F.shape[1]
    rel = 1e-9
    path = np.empty(V, np.int64)
    run_piece = np.empty(V, np.int64)
    p = np.empty(V + 1, np.int64)
    delta = np.empty((V, dim))
    inc = np.empty(V)
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        m = 0
        w = y
        while True:
            path[m] = w
            m += 1
            if w == x:
                break
            w = P[x, w]
        for t in range(m // 2):
            tmp = path[t]
            path[t] = path[m - 1 - t]
            path[m - 1 - t] = tmp
        R = 0
        for t in range(m - 1):
            u = path[t]
            v = path[t + 1]
            if parent0[u] == v:
                pc = up_piece[u]
            else:
                pc = up_piece[v]
            if R == 0 or run_piece[R - 1] != pc:
                run_piece[R] = pc
                p[R] = u
                R += 1
        p[R] = y
        dxy = D[x, y]

        i0 = 0
        for i in range(1, R):
            if levels[run_piece[i]] < levels[run_piece[i0]]:
                i0 = i
        valley = 1
        for i in range(R - 1):
            a = levels[run_piece[i]]
            b = levels[run_piece[i + 1]]
            if i < i0:
                if not a > b:
                    valley = 0
            elif not a < b:
                valley = 0

        n = scale_index(dxy)
        lo1 = -1
        hi1 = -1
        lo2 = -1
        hi2 = -1
        for i in range(R):
            lv = levels[run_piece[i]]
            if lv <= n:
                if lo1 < 0:
                    lo1 = i
                hi1 = i
            if lv <= n + N:
                if lo2 < 0:
                    lo2 = i
                hi2 = i
        if lo1 < 0:
            lo1 = i0
            hi1 = i0
        if lo2 < 0:
            lo2 = i0
            hi2 = i0

        inc_ok = 1
        support_ok = 1
        for i in range(R):
            pc = run_piece[i]
            b0 = colors[pc] * dblock
            b1 = b0 + dblock
            s = 0.0
            outside = 0.0
            for c in range(dim):
                t = F[p[i], c] - F[p[i + 1], c]
                delta[i, c] = t
                s += t * t
                if c < b0 or c >= b1:
                    outside += t * t
            inc[i] = np.sqrt(s)
            if outside != 0.0:
                support_ok = 0
            dpi = D[p[i], p[i + 1]]
            if dpi > inc[i] * (1.0 + rel):
                inc_ok = 0
            if inc[i] > L * 2.0 ** (2 - levels[pc]) * (1.0 + rel):
                inc_ok = 0

        res2 = 0.0
        f2 = 0.0
        mid2 = 0.0
        for c in range(dim):
            s = 0.0
            sm = 0.0
            for i in range(R):
                s += delta[i, c]
                if lo2 <= i <= hi2:
                    sm += delta[i, c]
            diff = F[x, c] - F[y, c]
            res2 += (diff - s) * (diff - s)
            f2 += diff * diff
            mid2 += sm * sm

        tail_lo = 0.0
        tail_hi = 0.0
        tail_f = 0.0
        pyth = 0.0
        d2 = 0.0
        dsum = 0.0
        for i in range(R):
            dpi = D[p[i], p[i + 1]]
            if i < lo2:
                tail_lo += dpi
                tail_f += inc[i]
            elif i > hi2:
                tail_hi += dpi
                tail_f += inc[i]
            else:
                pyth += inc[i] * inc[i]
                d2 += dpi * dpi
                dsum += dpi

        orth = 1
        for i in range(lo2, hi2 + 1):
            for j in range(i + 1, hi2 + 1):
                if support_ok == 1 and colors[run_piece[i]] != colors[run_piece[j]]:
                    continue
                dot = 0.0
                for c in range(dim):
                    dot += delta[i, c] * delta[j, c]
                if abs(dot) > rel * inc[i] * inc[j]:
                    orth = 0

        row = out[k]
        row[0] = n
        row[1] = 1.0 if dxy > 0.5 else 0.0
        row[2] = R
        row[3] = i0
        row[4] = valley
        row[5] = hi1 - lo1
        row[6] = hi2 - lo2
        row[7] = tail_lo
        row[8] = tail_hi
        row[9] = np.sqrt(res2)
        row[10] = np.sqrt(f2)
        row[11] = inc_ok
        row[12] = support_ok
        row[13] = orth
        row[14] = np.sqrt(mid2)
        row[15] = np.sqrt(pyth)
        row[16] = np.sqrt(d2)
        row[17] = dsum
        row[18] = tail_f
        row[19] = dxy


def sweep_pairs(xs, ys, D, P, parent0, up_piece, levels, colors, F, dblock, L, N, threads=1):
    """Traverse every listed pair and collect the per-pair audit quantities.

    Returns an array with one row per pair and columns ``SWEEP_COLUMNS``.
    Work is split into contiguous chunks across ``threads`` workers; the
    rows do not depend on the split.
    """
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    args = (
        np.ascontiguousarray(D, dtype=np.float64),
        np.ascontiguousarray(P, dtype=np.int64),
        np.ascontiguousarray(parent0, dtype=np.int64),
        np.ascontiguousarray(up_piece, dtype=np.int64),
        np.ascontiguousarray(levels, dtype=np.int64),
        np.ascontiguousarray(colors, dtype=np.int64),
        np.ascontiguousarray(F, dtype=np.float64),
        int(dblock),
        float(L),
        int(N),
    )
    out = np.zeros((xs.shape[0], len(SWEEP_COLUMNS)))
    threads = max(1, int(threads))
    if threads == 1 or xs.shape[0] < 2 * threads:
        _sweep(xs, ys, *args, out)
        return out
    bounds = np.linspace(0, xs.shape[0], threads + 1).astype(np.int64)

    def work(c):
        a, b = bounds[c], bounds[c + 1]
        _sweep(xs[a:b], ys[a:b], *args, out[a:b])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, range(threads)))
    return out
