"""Command-line front end: ``qctree {gen,decompose,embed,verify,report}``.

Exit codes: 0 success (and all audits pass), 1 audit failure, 2 input error.
"""
import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .assemble import GlobalConstants, GlobalEmbedding
from .coloring import Coloring
from .generators import KINDS, GeneratorSpec, generate
from .local import STRATEGIES, EmbeddingFailure, LocalEmbedConfig, LocalEmbedding
from .nets import DecompositionError, build_nets, decompose
from .pipeline import run_pipeline
from .tree import TreeValidationError, normalize
from .verify import audit_all, measure_distortion, pair_ratio_table

EXIT_OK, EXIT_AUDIT, EXIT_INPUT = 0, 1, 2
ARTIFACTS = ("tree.json", "decomposition.json", "coloring.json", "local.json", "constants.json", "embedding.csv")

logger = logging.getLogger("qctree")


class InputError(Exception):
    pass


# -- generator specs ----------------------------------------------------------

_GEN_FLAGS = {
    # flag: (dest, type, generator parameter)
    "--kind": ("kind", str, None),
    "--k": ("k", int, "k"),
    "--legs": ("legs", float, "legs"),
    "--samples": ("samples", int, "samples"),
    "--n": ("n", int, "n"),
    "--depth": ("depth", int, "depth"),
    "--alpha": ("alpha", float, "alpha"),
}


def _spec_from_args(args):
    if args.spec and args.kind:
        raise InputError("give either --spec or --kind, not both")
    if args.spec:
        try:
            obj = io.load_json(args.spec)
            spec = GeneratorSpec.from_json(obj)
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"{args.spec}: generator spec needs a 'kind' field ({exc!r})") from None
        return spec
    if not args.kind:
        raise InputError("gen needs --kind or --spec")
    params = {p: getattr(args, dest) for dest, _, p in _GEN_FLAGS.values() if p and getattr(args, dest) is not None}
    if args.kind == "random_tree":
        params["seed"] = args.seed
    return GeneratorSpec(args.kind, params)


# -- loading artifacts --------------------------------------------------------


def _load_tree(path):
    if path is None:
        raise InputError("--input is required")
    return io.load_tree(path)


def load_artifacts(directory, embedding_csv=None):
    """Rebuild the pipeline state written by ``embed``.

    With ``embedding_csv`` the stored global coordinates are replaced by the
    ones in that file.
    """
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"{d}: not a directory of embed outputs")
    missing = [name for name in ARTIFACTS if not (d / name).exists()]
    if missing:
        raise InputError(f"{d}: missing {', '.join(missing)}")
    tree = io.load_tree(d / "tree.json")
    dec = io.decomposition_from_json(io.load_json(d / "decomposition.json"), tree, str(d / "decomposition.json"))
    try:
        coloring = Coloring.from_json(io.load_json(d / "coloring.json"))
        constants = GlobalConstants.from_json(io.load_json(d / "constants.json"))
        local = {}
        for obj in io.load_json(d / "local.json")["pieces"]:
            emb = LocalEmbedding.from_json(obj)
            idx = np.array(emb.members)
            local[emb.ref] = LocalEmbedding.from_json(obj, tree.metric[np.ix_(idx, idx)])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{d}: malformed artifact ({exc!r})") from None
    F = io.load_embedding_coords(embedding_csv or d / "embedding.csv")
    if F.shape != (tree.n_vertices, constants.A * constants.d):
        raise InputError(
            f"embedding has shape {F.shape}, expected {(tree.n_vertices, constants.A * constants.d)}"
        )
    if set(local) != {p.ref for p in dec.pieces} or set(coloring.assignment) != set(local):
        raise InputError(f"{d}: pieces in local.json/coloring.json do not match decomposition.json")
    emb = GlobalEmbedding(F, constants, dict(coloring.assignment), local)
    return tree, dec, coloring, emb


def _write_outputs(out, result):
    out.mkdir(parents=True, exist_ok=True)
    io.save_tree(result.tree, out / "tree.json")
    io.save_json(io.decomposition_to_json(result.dec), out / "decomposition.json")
    io.save_json(result.coloring.to_json(), out / "coloring.json")
    io.save_json({"pieces": [result.locals[p.ref].to_json() for p in result.dec.pieces]}, out / "local.json")
    io.save_json(result.constants.to_json(), out / "constants.json")
    io.save_embedding(result.embedding, out / "embedding.csv")


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args):
    spec = _spec_from_args(args)
    try:
        tree = generate(spec)
    except ValueError as exc:
        if isinstance(exc, TreeValidationError):
            raise
        raise InputError(str(exc)) from None
    if args.output is None:
        json.dump(io.tree_to_json(tree), sys.stdout)
        sys.stdout.write("\n")
    else:
        io.save_tree(tree, args.output)
    return EXIT_OK


def cmd_decompose(args):
    tree = _load_tree(args.input)
    if not tree.normalized:
        tree = normalize(tree)
    dec = decompose(tree, build_nets(tree))
    obj = io.decomposition_to_json(dec)
    if args.output is None:
        json.dump(obj, sys.stdout)
        sys.stdout.write("\n")
    else:
        io.save_json(obj, args.output)
    return EXIT_OK


def cmd_embed(args):
    if args.output is None:
        raise InputError("embed needs --output DIR")
    tree = _load_tree(args.input)
    if not tree.normalized:
        tree = normalize(tree)
    dec = None
    if args.decomposition:
        dec = io.decomposition_from_json(io.load_json(args.decomposition), tree, args.decomposition)
    config = LocalEmbedConfig(d=args.dim, L_cap=args.L_cap, strategy=args.strategy, seed=args.seed)
    result = run_pipeline(tree, config, force_N=args.force_N, dec=dec)
    _write_outputs(Path(args.output), result)
    print(result.constants.line())
    return EXIT_OK


def cmd_verify(args):
    if args.input is None:
        raise InputError("verify needs --input DIR (an embed output directory)")
    tree, dec, coloring, emb = load_artifacts(args.input, args.embedding)
    report = audit_all(tree, dec, coloring, emb, mode=args.audit, seed=args.seed, threads=args.threads)
    out = Path(args.output) if args.output else Path(args.input) / "report.json"
    io.save_json(report, out)
    failed = [c["check"] for c in report["checks"] if not c["pass"]]
    for name in failed:
        print(f"audit failed: {name}", file=sys.stderr)
    print(f"{'PASS' if report['pass'] else 'FAIL'} {len(report['checks']) - len(failed)}/{len(report['checks'])} checks, "
          f"{report['audited_pairs']} pairs audited")
    return EXIT_OK if report["pass"] else EXIT_AUDIT


def cmd_report(args):
    if args.input is None:
        raise InputError("report needs --input DIR (an embed output directory)")
    tree, dec, coloring, emb = load_artifacts(args.input, args.embedding)
    rep = measure_distortion(tree, emb, seed=args.seed)
    out = Path(args.output) if args.output else Path(args.input) / "distortion.json"
    io.save_json(rep.to_json(), out)
    if args.pairs_csv:
        xs, ys, r = pair_ratio_table(tree, emb)
        with open(args.pairs_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "d", "ratio"])
            for x, y, v in zip(xs.tolist(), ys.tolist(), r.tolist()):
                w.writerow([x, y, repr(float(tree.metric[x, y])), repr(v)])
    print(f"a={rep.a_measured:.6g} b={rep.b_measured:.6g} distortion={rep.distortion:.6g} "
          f"lower={rep.theoretical_lower:.6g} upper={rep.theoretical_upper:.6g}")
    return EXIT_OK if rep.pass_lower and rep.pass_upper else EXIT_AUDIT


# -- parser -------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input file (tree JSON) or embed output directory")
    common.add_argument("--output", help="output file or directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qctree", description="Bi-Lipschitz embeddings of quasiconformal trees.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a normalized corpus tree")
    g.add_argument("--spec", help="JSON generator spec file")
    g.add_argument("--kind", choices=KINDS)
    for flag, (dest, typ, _) in _GEN_FLAGS.items():
        if flag != "--kind":
            g.add_argument(flag, dest=dest, type=typ)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("decompose", parents=[common], help="export nets, hulls and pieces")
    d.set_defaults(func=cmd_decompose)

    e = sub.add_parser("embed", parents=[common], help="run the full pipeline")
    e.add_argument("--decomposition", help="use this decomposition JSON instead of rebuilding it")
    e.add_argument("--dim", type=int, default=3, help="starting local dimension d")
    e.add_argument("--force-N", dest="force_N", type=int, help="override the automatic N")
    e.add_argument("--L-cap", dest="L_cap", type=float, default=64.0)
    e.add_argument("--strategy", choices=STRATEGIES, default="stress_certify")
    e.set_defaults(func=cmd_embed)

    v = sub.add_parser("verify", parents=[common], help="audit an embed output directory")
    v.add_argument("--embedding", help="embedding CSV to audit instead of the stored one")
    v.add_argument("--audit", choices=("fast", "exhaustive"), default="fast")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", parents=[common], help="distortion summary and histogram")
    r.add_argument("--embedding", help="embedding CSV to measure instead of the stored one")
    r.add_argument("--pairs-csv", dest="pairs_csv", help="also write every pair ratio to this CSV")
    r.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, io.FormatError, TreeValidationError, DecompositionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmbeddingFailure as exc:
        print(f"error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_AUDIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
