"""JSON and CSV serialization of trees, decompositions and embeddings."""
import csv
import json
from pathlib import Path

import numpy as np

from .tree import MetricTree, TreeValidationError


class FormatError(ValueError):
    """A file could not be parsed into the expected structure."""


def _read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


# -- trees ------------------------------------------------------------------


def tree_to_json(tree):
    return {
        "vertices": tree.n_vertices,
        "edges": [list(e) for e in tree.edges],
        "metric": tree.metric.tolist(),
    }


def tree_from_json(obj, source="<tree>"):
    if not isinstance(obj, dict):
        raise FormatError(f"{source}: expected a JSON object")
    for key in ("vertices", "edges"):
        if key not in obj:
            raise FormatError(f"{source}: missing field {key!r}")
    has_metric, has_lengths = "metric" in obj, "edge_lengths" in obj
    if has_metric == has_lengths:
        raise TreeValidationError(f"{source}: exactly one of 'metric' and 'edge_lengths' must be given")
    try:
        V = int(obj["vertices"])
        edges = [(int(u), int(v)) for u, v in obj["edges"]]
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{source}: field 'edges' or 'vertices': {exc}") from None
    try:
        if has_lengths:
            return MetricTree.from_edge_lengths(V, edges, np.asarray(obj["edge_lengths"], dtype=np.float64))
        metric = np.asarray(obj["metric"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, TreeValidationError):
            raise
        raise FormatError(f"{source}: field 'metric'/'edge_lengths': {exc}") from None
    return MetricTree(V, edges, metric)


def save_tree(tree, path):
    _write_json(tree_to_json(tree), path)


def load_tree(path):
    return tree_from_json(_read_json(path), str(path))


# -- decomposition ------------------------------------------------------------


def decomposition_to_json(dec):
    return {
        "pieces": [
            {"n": p.level, "j": p.index, "root": p.root, "members": sorted(p.members)} for p in dec.pieces
        ],
        "hulls": [{"n": n, "vertices": sorted(h)} for n, h in sorted(dec.hulls.items())],
        "nets": [{"n": n, "vertices": sorted(dec.nets.net(n))} for n in range(1, dec.nets.n_max + 1)],
    }


def decomposition_from_json(obj, tree, source="<decomposition>"):
    from .nets import Decomposition, NetHierarchy, Piece
    from .tree import leaves

    try:
        nets_list = sorted(obj["nets"], key=lambda e: e["n"])
        levels = tuple(frozenset(int(v) for v in e["vertices"]) for e in nets_list)
        nets = NetHierarchy(levels, leaves(tree))
        hulls = {int(e["n"]): frozenset(int(v) for v in e["vertices"]) for e in obj["hulls"]}
        pieces = []
        for e in obj["pieces"]:
            n = int(e["n"])
            members = frozenset(int(v) for v in e["members"])
            fresh = nets.net(n) - nets.net(n - 1)
            pieces.append(Piece(n, int(e["j"]), members, int(e["root"]), frozenset(members & fresh)))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{source}: malformed decomposition ({exc!r})") from None
    pieces.sort(key=lambda p: p.ref)
    return Decomposition(nets, hulls, tuple(pieces), tree.n_vertices, tree.neighbors, np.asarray(tree.parent))


# -- embeddings ---------------------------------------------------------------


def save_embedding(embedding, path):
    F = embedding.coords
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex"] + [f"c{i}" for i in range(F.shape[1])])
        for v, row in enumerate(F):
            w.writerow([v] + [repr(float(c)) for c in row])


def load_embedding_coords(path):
    """Coordinates from an embedding CSV as a (V, k) array."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: cannot read ({exc.strerror})") from None
    if not rows or not rows[0] or rows[0][0] != "vertex":
        raise FormatError(f"{path}: line 1: expected header starting with 'vertex'")
    width = len(rows[0]) - 1
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != width + 1:
            raise FormatError(f"{path}: line {lineno}: expected {width + 1} fields, got {len(row)}")
        try:
            if int(row[0]) != lineno - 2:
                raise FormatError(f"{path}: line {lineno}: vertex ids must be 0..V-1 in order")
            out.append([float(c) for c in row[1:]])
        except ValueError as exc:
            raise FormatError(f"{path}: line {lineno}: {exc}") from None
    return np.array(out, dtype=np.float64).reshape(len(out), width)


def save_json(obj, path):
    _write_json(obj, path)


def load_json(path):
    return _read_json(path)
