"""The numba kernels agree with their fallbacks, in process and across the env flag."""
import os
import subprocess
import sys

import numpy as np
import pytest

from qctree import _kernels as K
from qctree.generators import generate
from qctree.nets import all_pairs
from qctree.pipeline import run_pipeline


def py(fn):
    return getattr(fn, "py_func", fn)


@pytest.fixture(scope="module")
def case():
    r = run_pipeline(generate(kind="random_tree", n=40, seed=3))
    return r


def test_arc_diameters_agree():
    for spec in (dict(kind="koch_arc", depth=3), dict(kind="random_tree", n=40, seed=1)):
        t = generate(**spec)
        args = (np.array(t.metric), t.pred, t.hops)
        a = K._arc_diameters_loops(*args)
        assert np.array_equal(a, K._arc_diameters_numpy(*args))
        assert np.array_equal(a, py(K._arc_diameters_loops)(*args))


def test_triangle_agree():
    t = generate(kind="koch_arc", depth=3)
    D = np.array(t.metric)
    assert K._triangle_worst_loops(D) == K._triangle_worst_numpy(D)


def test_pair_ratios_agree(case):
    xs, ys = all_pairs(case.tree.n_vertices)
    F, D = case.embedding.coords, case.tree.metric
    a = K._pair_ratios_loops(F, D, xs, ys)
    b = K._pair_ratios_numpy(F, D, xs, ys)
    assert np.allclose(a, b, rtol=1e-14, atol=0)


def test_sweep_agrees_with_python(case):
    r = case
    xs, ys = all_pairs(r.tree.n_vertices)
    colors = np.array([r.coloring.assignment[p.ref] - 1 for p in r.dec.pieces], dtype=np.int64)
    c = r.constants
    args = (r.tree.metric, r.tree.pred, r.tree.parent, r.dec.up_piece, r.dec.levels_array, colors,
            r.embedding.coords, c.d, c.L, c.N)
    a = np.zeros((xs.size, len(K.SWEEP_COLUMNS)))
    b = np.zeros_like(a)
    K._sweep(xs, ys, *args, a)
    py(K._sweep)(xs, ys, *args, b)
    assert np.array_equal(a, b)


def test_piece_counts_agree(case):
    r = case
    xs, ys = all_pairs(r.tree.n_vertices)
    ptr, pcs = r.dec.adjacency_pieces
    args = (xs, ys, r.tree.metric, r.tree.pred, ptr, pcs, r.dec.levels_array)
    assert np.array_equal(K._path_piece_counts(*args), py(K._path_piece_counts)(*args))


@pytest.mark.parametrize("d", [1.0, 0.75, 0.5, 0.3, 0.25, 1e-3, 2.0**-20])
def test_scale_index_exact(d):
    n = K.scale_index(d)
    assert d <= 2.0**-n and (n == 0 or d > 2.0 ** -(n + 1))
    assert py(K.scale_index)(d) == n


def test_env_flag_selects_fallback_with_same_output(tmp_path):
    code = (
        "import sys, numpy as np\n"
        "from qctree import _kernels\n"
        "from qctree.generators import generate\n"
        "from qctree.pipeline import run_pipeline\n"
        "from qctree.verify import audit_all\n"
        "r = run_pipeline(generate(kind='random_tree', n=30, seed=5))\n"
        "rep = audit_all(r.tree, r.dec, r.coloring, r.embedding)\n"
        "np.save(sys.argv[1], r.embedding.coords)\n"
        "print(_kernels.USE_NUMBA, rep['pass'])\n"
    )
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, QCTREE_NO_NUMBA=flag)
        f = tmp_path / f"F{flag}.npy"
        res = subprocess.run([sys.executable, "-c", code, str(f)], env=env, capture_output=True, text=True, check=True)
        outs[flag] = (res.stdout.split(), np.load(f))
    assert outs["0"][0] == ["True", "True"]
    assert outs["1"][0] == ["False", "True"]
    assert np.array_equal(outs["0"][1], outs["1"][1])
