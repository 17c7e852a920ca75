"""Time the numba kernels against their fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  The fallbacks are what
``QCTREE_NO_NUMBA=1`` selects: vectorized numpy where one exists, otherwise
the same loop code run as plain Python.  The last section times a full
``qctree embed`` + ``verify`` in a subprocess under each setting.
"""
import argparse
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from qctree import _kernels as K
from qctree.generators import generate
from qctree.nets import all_pairs
from qctree.pipeline import run_pipeline


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def py(fn):
    return getattr(fn, "py_func", fn)


def row(name, t_fast, t_slow, same):
    print(f"{name:<28} numba {t_fast * 1e3:9.2f} ms   fallback {t_slow * 1e3:10.2f} ms   "
          f"speedup {t_slow / t_fast:7.1f}x   identical={same}")


def kernels(kind, params, sweep_pairs):
    tree = generate(kind=kind, **params)
    V = tree.n_vertices
    print(f"\n{kind} {params}: V={V}")
    D, P, H = tree.metric, tree.pred, tree.hops
    K._arc_diameters_loops(D, P, H)  # compile outside the timing

    t_fast, a = best_of(lambda: K._arc_diameters_loops(D, P, H))
    t_slow, b = best_of(lambda: K._arc_diameters_numpy(D, P, H))
    row("arc_diameters", t_fast, t_slow, np.array_equal(a, b))

    K._triangle_worst_loops(D)
    t_fast, a = best_of(lambda: K._triangle_worst_loops(D))
    t_slow, b = best_of(lambda: K._triangle_worst_numpy(D))
    row("triangle_worst", t_fast, t_slow, a[0] == b[0])

    r = run_pipeline(tree)
    F = r.embedding.coords
    xs, ys = all_pairs(V)
    K._pair_ratios_loops(F, D, xs, ys)
    t_fast, a = best_of(lambda: K._pair_ratios_loops(F, D, xs, ys))
    t_slow, b = best_of(lambda: K._pair_ratios_numpy(F, D, xs, ys))
    row("pair_ratios", t_fast, t_slow, np.allclose(a, b, rtol=1e-14, atol=0))

    dec = r.dec
    colors = np.array([r.coloring.assignment[p.ref] - 1 for p in dec.pieces], dtype=np.int64)
    c = r.constants
    xs, ys = xs[:sweep_pairs], ys[:sweep_pairs]
    args = (D, P, tree.parent, dec.up_piece, dec.levels_array, colors, F, c.d, c.L, c.N)
    out_a = np.zeros((xs.size, len(K.SWEEP_COLUMNS)))
    out_b = np.zeros_like(out_a)
    K._sweep(xs[:2], ys[:2], *args, out_a[:2])
    t_fast, _ = best_of(lambda: K._sweep(xs, ys, *args, out_a), 3)
    t_slow, _ = best_of(lambda: py(K._sweep)(xs, ys, *args, out_b), 1)
    row(f"sweep ({xs.size} pairs)", t_fast, t_slow, np.array_equal(out_a, out_b))


def end_to_end(kind, params):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        flags = [f"--{k}={v}" for k, v in params.items()]
        subprocess.run([sys.executable, "-m", "qctree.cli", "gen", "--kind", kind, *flags,
                        "--output", str(tmp / "t.json")], check=True)
        for label, env_flag in (("numba", "0"), ("fallback", "1")):
            env = dict(os.environ, QCTREE_NO_NUMBA=env_flag)
            t0 = time.perf_counter()
            subprocess.run([sys.executable, "-m", "qctree.cli", "embed", "--input", str(tmp / "t.json"),
                            "--output", str(tmp / label)], check=True, env=env, stdout=subprocess.DEVNULL)
            subprocess.run([sys.executable, "-m", "qctree.cli", "verify", "--input", str(tmp / label)],
                           check=True, env=env, stdout=subprocess.DEVNULL)
            print(f"end-to-end {kind} {params} [{label}]: {time.perf_counter() - t0:.2f} s")
        same = (tmp / "numba" / "embedding.csv").read_bytes() == (tmp / "fallback" / "embedding.csv").read_bytes()
        print(f"embedding.csv identical across paths: {same}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="small trees only")
    args = ap.parse_args()
    if not K.USE_NUMBA:
        sys.exit("numba is disabled (QCTREE_NO_NUMBA set or numba missing); nothing to compare")
    cases = [("koch_arc", {"depth": 3}, 2000), ("vicsek", {"depth": 2}, 2000)]
    if not args.quick:
        cases += [("koch_arc", {"depth": 4}, 5000), ("random_tree", {"n": 200, "seed": 0}, 5000)]
    for kind, params, n_sweep in cases:
        kernels(kind, params, n_sweep)
    print()
    end_to_end("random_tree", {"n": 120, "seed": 1})


if __name__ == "__main__":
    main()
