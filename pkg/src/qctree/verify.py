"""Distortion measurement and the audit battery over a finished pipeline."""
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .assemble import assemble, evaluate_path_sum, traversed_from_root
from .coloring import build_graph, greedy_color
from .local import certify, extension_gates, extended_coords
from .nets import all_pairs, audit_pieces, compute_M, scale_index, traversal
from .tree import normalize

REL = 1e-9
EXHAUSTIVE_LIMIT = 2000
N_SAMPLES = 2_000_000
SWEEP_EXHAUSTIVE_LIMIT = 500
SWEEP_SAMPLES = 100_000


@dataclass
class DistortionReport:
    pair_count: int
    a_measured: float
    b_measured: float
    distortion: float
    theoretical_lower: float
    theoretical_upper: float
    argmin: tuple
    argmax: tuple
    histogram: list
    histogram_edges: list
    sampled: bool
    pass_lower: bool
    pass_upper: bool

    def to_json(self):
        out = asdict(self)
        out["argmin"] = list(self.argmin)
        out["argmax"] = list(self.argmax)
        return out


@dataclass
class TraversalBand:
    x: int
    y: int
    n: int
    coarse: bool
    levels: tuple
    i_low: int  # first index with level <= n (0-based)
    i_high: int
    under: int  # first index with level <= n + N
    over: int
    tail_low: float
    tail_high: float
    tail_bound: float
    middle_increments: list = field(default_factory=list)
    low_gap_ok: bool = True
    band_gap_ok: bool = True
    tails_ok: bool = True


def sample_pairs(V, k, seed):
    """``k`` ordered pairs of distinct vertices drawn with a seeded generator."""
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, V, size=k)
    ys = rng.integers(0, V - 1, size=k)
    ys = ys + (ys >= xs)
    return xs.astype(np.int64), ys.astype(np.int64)


def measure_distortion(tree, embedding, seed=0, exhaustive=None):
    """Min and max of ``|f(x) - f(y)| / d(x, y)`` over all (or sampled) pairs."""
    V = tree.n_vertices
    c = embedding.constants
    if V < 2:
        return DistortionReport(0, 1.0, 1.0, 1.0, c.lower, c.upper, (0, 0), (0, 0), [], [], False, True, True)
    if exhaustive is None:
        exhaustive = V <= EXHAUSTIVE_LIMIT
    if exhaustive:
        xs, ys = all_pairs(V)
    else:
        xs, ys = sample_pairs(V, N_SAMPLES, seed)
    r = _kernels.pair_ratios(embedding.coords, tree.metric, xs, ys)
    i, j = int(np.argmin(r)), int(np.argmax(r))
    a, b = float(r[i]), float(r[j])
    counts, edges = np.histogram(np.log(r), bins=32)
    return DistortionReport(
        pair_count=int(r.size), a_measured=a, b_measured=b, distortion=b / a,
        theoretical_lower=c.lower, theoretical_upper=c.upper,
        argmin=(int(xs[i]), int(ys[i])), argmax=(int(xs[j]), int(ys[j])),
        histogram=counts.tolist(), histogram_edges=edges.tolist(), sampled=not exhaustive,
        pass_lower=a >= c.lower - 1e-9, pass_upper=b <= c.upper + 1e-9,
    )


def pair_ratio_table(tree, embedding):
    xs, ys = all_pairs(tree.n_vertices)
    return xs, ys, _kernels.pair_ratios(embedding.coords, tree.metric, xs, ys)


# ---------------------------------------------------------------------------
# bands
# ---------------------------------------------------------------------------


def band_analysis(tree, dec, embedding, x, y):
    """Band indices, tails and middle-band increments for one pair.

    The scale ``n`` is the largest integer with ``d(x, y) <= 2**-n``; pairs
    with ``d(x, y) > 1/2`` get ``n = 0`` and are flagged ``coarse``.  Empty
    bands collapse to the valley index.
    """
    c = embedding.constants
    F = embedding.coords
    D = tree.metric
    tr = traversal(tree, dec, x, y)
    lv = tr.levels
    n = scale_index(D[x, y])

    def band(limit):
        idx = [i for i, m in enumerate(lv) if m <= limit]
        return (idx[0], idx[-1]) if idx else (tr.valley, tr.valley)

    i_low, i_high = band(n)
    under, over = band(n + c.N)
    steps = [float(D[a, b]) for a, b in zip(tr.points[:-1], tr.points[1:])]
    tail_low = sum(steps[:under])
    tail_high = sum(steps[over + 1 :])
    bound = 2.0 ** (2 - (n + c.N))
    mids = [F[tr.points[i]] - F[tr.points[i + 1]] for i in range(under, over + 1)]
    return TraversalBand(
        int(x), int(y), n, bool(D[x, y] > 0.5), lv, i_low, i_high, under, over,
        tail_low, tail_high, bound, mids,
        low_gap_ok=i_high - i_low <= c.M,
        band_gap_ok=over - under <= 2 * c.N + c.M,
        tails_ok=tail_low <= bound and tail_high <= bound,
    )


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def audit_pairs(V, mode="fast", seed=0):
    """Pairs used by the pair audits: all of them, or a seeded sample in fast mode."""
    if mode == "exhaustive" or V <= SWEEP_EXHAUSTIVE_LIMIT or V * (V - 1) // 2 <= SWEEP_SAMPLES:
        return all_pairs(V)
    return sample_pairs(V, SWEEP_SAMPLES, seed)


def sweep(tree, dec, embedding, xs, ys, threads=1):
    """Per-pair traversal quantities as a dict of column arrays."""
    colors = np.array([embedding.colors[p.ref] - 1 for p in dec.pieces], dtype=np.int64)
    c = embedding.constants
    out = _kernels.sweep_pairs(
        xs, ys, tree.metric, tree.pred, tree.parent, dec.up_piece, dec.levels_array, colors,
        embedding.coords, c.d, c.L, c.N, threads=threads,
    )
    cols = {name: out[:, i] for i, name in enumerate(_kernels.SWEEP_COLUMNS)}
    cols["x"], cols["y"] = xs, ys
    return cols


def _witnesses(cols, bad, limit=20):
    k = np.flatnonzero(bad)[:limit]
    return [[int(cols["x"][i]), int(cols["y"][i])] for i in k]


def _entry(name, cols, bad, **extra):
    bad = np.asarray(bad, dtype=bool)
    out = {"check": name, "pass": not bool(bad.any()), "witnesses": _witnesses(cols, bad)}
    if bad.any():
        out["violations"] = int(bad.sum())
    out.update(extra)
    return out


def band_checks(cols, constants):
    c = constants
    bound = np.ldexp(4.0, -(cols["n"].astype(np.int64) + c.N))
    return [
        _entry("traversal_valley", cols, cols["valley_ok"] == 0),
        _entry("band_low_gap", cols, cols["low_gap"] > c.M),
        _entry("band_middle_gap", cols, cols["band_gap"] > 2 * c.N + c.M),
        _entry("band_tails", cols, (cols["tail_low"] > bound) | (cols["tail_high"] > bound)),
        _entry("increment_bounds", cols, cols["increments_ok"] == 0),
        _entry("telescoping", cols, cols["telescope_residual"] > REL * (1 + cols["f_dist"])),
        _entry("coarse_pairs", cols, np.zeros_like(cols["n"], dtype=bool),
               count=int(cols["coarse"].sum()), informational=True),
    ]


def lower_chain_checks(cols, constants):
    """Each step of the lower-bound chain, recomputed on the measured data."""
    c = constants
    K = cols["band_gap"] + 1
    tails_d = cols["tail_low"] + cols["tail_high"]
    f, dist = cols["f_dist"], cols["dist"]
    return [
        _entry("lower_support", cols, cols["support_ok"] == 0),
        _entry("lower_orthogonality", cols, cols["orthogonal_ok"] == 0),
        _entry("lower_pythagoras", cols, np.abs(cols["mid_norm"] - cols["mid_pyth"]) > REL * (1 + cols["mid_pyth"])),
        _entry("lower_unit_steps", cols, cols["mid_pyth"] < cols["mid_dist_l2"] * (1 - REL)),
        _entry("lower_cauchy_schwarz", cols, cols["mid_dist_l2"] < cols["mid_dist_sum"] / np.sqrt(K) * (1 - REL)),
        _entry("lower_triangle", cols, cols["mid_dist_sum"] < (dist - tails_d) * (1 - REL)),
        _entry("lower_tail_lipschitz", cols, cols["tail_f"] > c.L * tails_d * (1 + REL) + 1e-15),
        _entry("lower_reverse_triangle", cols, f < (cols["mid_norm"] - cols["tail_f"]) - REL * (1 + f)),
        _entry("lower_final", cols, f < c.lower * dist - REL),
    ]


def lower_bound_audit(tree, dec, embedding, mode="fast", seed=0, threads=1):
    """Recompute the lower-bound chain for the audited pairs; collect violations."""
    xs, ys = audit_pairs(tree.n_vertices, mode, seed)
    cols = sweep(tree, dec, embedding, xs, ys, threads)
    checks = lower_chain_checks(cols, embedding.constants)
    return {"pass": all(ch["pass"] for ch in checks), "checks": checks,
            "witnesses": sorted({tuple(w) for ch in checks for w in ch["witnesses"]})}


# ---------------------------------------------------------------------------
# piece-level and assembly checks
# ---------------------------------------------------------------------------


def _simple(name, witnesses, **extra):
    out = {"check": name, "pass": not witnesses, "witnesses": list(witnesses)[:20]}
    out.update(extra)
    return out


def local_checks(tree, dec, embedding, L_cap=None):
    D = tree.metric
    H = tree.hops
    r11 = dec.base_root
    through_root = traversed_from_root(tree, dec)
    cert, root0, lip, const, vanish_root, vanish_off, gate_bad = [], [], [], [], [], [], []
    for i, p in enumerate(dec.pieces):
        emb = embedding.locals[p.ref]
        lower, upper = certify(emb, tree)
        if lower < 1 - REL or upper > emb.L * (1 + REL) or (L_cap is not None and emb.L > L_cap):
            cert.append([list(p.ref), lower, upper, emb.L])
        if np.any(emb.point(p.root) != 0.0):
            root0.append(list(p.ref))
        gates = extension_gates(tree, p)
        members = np.fromiter(p.members, dtype=np.int64)
        # gate lies on path(x, q) for every member q
        on_path = H[:, members] == H[np.arange(tree.n_vertices), gates][:, None] + H[gates][:, members]
        if not on_path.all() or not np.all(np.isin(gates, members)):
            gate_bad.append(list(p.ref))
        E = extended_coords(tree, p, emb, gates)
        diff = np.sqrt(((E[:, None, :] - E[None, :, :]) ** 2).sum(axis=2))
        if np.any(diff > emb.L * D * (1 + REL) + 1e-15):
            xx, yy = np.unravel_index(np.argmax(diff - emb.L * D), D.shape)
            lip.append([list(p.ref), int(xx), int(yy)])
        for q in dec.pieces:
            if q is p:
                continue
            qm = np.fromiter(q.members, dtype=np.int64)
            if np.any(E[qm] != E[qm[0]]):
                const.append([list(p.ref), list(q.ref)])
        if np.any(E[r11] != 0.0):
            vanish_root.append(list(p.ref))
        off = np.array([i not in through_root[x] for x in range(tree.n_vertices)])
        if np.any(E[off] != 0.0):
            vanish_off.append([list(p.ref), int(np.flatnonzero(off & np.any(E != 0.0, axis=1))[0])])
    return [
        _simple("local_certification", cert),
        _simple("local_root_origin", root0),
        _simple("gate_characterization", gate_bad),
        _simple("extension_lipschitz", lip),
        _simple("extension_constant", const),
        _simple("extension_root_vanishing", vanish_root),
        _simple("extension_vanishing_off_root_path", vanish_off),
    ]


def assembly_checks(tree, dec, coloring, embedding):
    F = embedding.coords
    c = embedding.constants
    rebuilt = assemble(tree, dec, coloring, embedding.locals, c).coords
    mismatch = np.flatnonzero(np.any(rebuilt != F, axis=1)).tolist()
    path_bad = [x for x in range(tree.n_vertices) if not np.array_equal(evaluate_path_sum(tree, dec, embedding, x), F[x])]
    restrict = []
    for p in dec.pieces:
        m = np.array(sorted(p.members))
        if len(m) < 2:
            continue
        iu, ju = np.triu_indices(len(m), 1)
        r = np.linalg.norm(F[m[iu]] - F[m[ju]], axis=1) / tree.metric[m[iu], m[ju]]
        if r.min() < 1 - REL or r.max() > c.L * (1 + REL):
            restrict.append([list(p.ref), float(r.min()), float(r.max())])
    return [
        _simple("assembly_exact", mismatch),
        _simple("base_root_origin", [] if np.all(F[dec.base_root] == 0.0) else [dec.base_root]),
        _simple("path_sum_exact", path_bad),
        _simple("piece_restriction_bilipschitz", restrict),
    ]


def coloring_checks(tree, dec, coloring, embedding):
    c = embedding.constants
    graph = build_graph(tree, dec, c.S)
    again = greedy_color(graph)
    used = sorted(set(coloring.assignment.values()))
    bad = [[list(a), list(b)] for a, b in graph.edges if coloring.assignment[a] == coloring.assignment[b]]
    return [
        _simple("coloring_proper", bad),
        _simple("coloring_deterministic", [] if again.assignment == coloring.assignment else ["differs"]),
        _simple("coloring_contiguous", [] if used == list(range(1, coloring.A + 1)) else used),
        _simple("coloring_greedy_bound", [] if coloring.A <= 1 + graph.max_degree else [coloring.A, graph.max_degree]),
        _simple("coloring_matches_constants", [] if coloring.A == c.A and coloring.S == c.S else [coloring.A, c.A]),
    ]


def tree_checks(tree, seed=0, samples=200):
    from .tree import path

    bad_norm = [] if tree.n_vertices == 1 or normalize(tree) == tree else ["not idempotent"]
    rng = np.random.default_rng(seed)
    rev, sub = [], []
    V = tree.n_vertices
    for _ in range(samples if V > 1 else 0):
        x, y = (int(v) for v in rng.integers(0, V, 2))
        pxy = path(tree, x, y)
        if path(tree, y, x) != pxy[::-1]:
            rev.append([x, y])
        i, j = sorted(int(v) for v in rng.integers(0, len(pxy), 2))
        if path(tree, pxy[i], pxy[j]) != pxy[i : j + 1]:
            sub.append([x, y])
    return [
        _simple("tree_normalized", [] if tree.normalized else ["not normalized"]),
        _simple("normalization_idempotent", bad_norm),
        _simple("path_reversal", rev),
        _simple("subpath_closure", sub),
    ]


def audit_all(tree, dec, coloring, embedding, mode="fast", seed=0, threads=1, L_cap=None):
    """Run every check; return a JSON-ready report with an aggregate ``pass``."""
    c = embedding.constants
    checks = tree_checks(tree, seed)
    checks += audit_pieces(tree, dec)["checks"]
    if tree.n_vertices > 1:
        M_now = compute_M(tree, dec)
        checks.append(_simple("M_recomputed", [] if M_now == c.M else [M_now, c.M], value=M_now))
    checks += coloring_checks(tree, dec, coloring, embedding)
    checks += local_checks(tree, dec, embedding, L_cap)
    checks += assembly_checks(tree, dec, coloring, embedding)
    report = measure_distortion(tree, embedding, seed)
    if tree.n_vertices > 1:
        xs, ys = audit_pairs(tree.n_vertices, mode, seed)
        cols = sweep(tree, dec, embedding, xs, ys, threads)
        checks += band_checks(cols, c)
        checks += lower_chain_checks(cols, c)
        n_audited = int(xs.size)
    else:
        n_audited = 0
    checks.append(_simple("distortion_lower", [] if report.pass_lower else [list(report.argmin)],
                          measured=report.a_measured, bound=c.lower))
    checks.append(_simple("distortion_upper", [] if report.pass_upper else [list(report.argmax)],
                          measured=report.b_measured, bound=c.upper))
    return {
        "pass": all(ch["pass"] for ch in checks),
        "audited_pairs": n_audited,
        "mode": mode,
        "constants": c.to_json(),
        "distortion": report.to_json(),
        "checks": checks,
    }
