"""End-to-end construction: decompose, embed pieces, pick constants, color, assemble."""
import logging
from dataclasses import dataclass, field

from .assemble import GlobalEmbedding, assemble, choose_constants, choose_N
from .coloring import build_graph, greedy_color
from .local import LocalEmbedConfig, embed_piece
from .nets import NetHierarchy, build_nets, compute_M, decompose
from .tree import normalize

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PipelineResult:
    tree: object
    nets: NetHierarchy
    dec: object
    locals: dict = field(repr=False)
    M: int
    graph: object = field(repr=False)
    coloring: object
    constants: object
    embedding: GlobalEmbedding = field(repr=False)


def run_pipeline(tree, config=LocalEmbedConfig(), force_N=None, dec=None):
    """Embed ``tree`` (normalized first if needed) and return every intermediate.

    The order matters: the local embeddings fix L, the decomposition fixes M,
    those two fix N and S = 2**N, and only then can the proximity graph be
    built and colored.  A precomputed decomposition ``dec`` of the
    (normalized) tree may be supplied instead of building one.
    """
    if not tree.normalized:
        tree = normalize(tree)
    if dec is not None:
        nets = dec.nets
    elif tree.n_vertices == 1:
        nets = NetHierarchy((frozenset({0}),), frozenset({0}))
    else:
        nets = build_nets(tree)
    if dec is None:
        dec = decompose(tree, nets)
    logger.info("decomposed %d vertices into %d pieces over %d levels",
                tree.n_vertices, len(dec.pieces), nets.n_max)

    local = {p.ref: embed_piece(tree, p, config) for p in dec.pieces}
    d = max(e.d for e in local.values())
    local = {ref: e.padded(d) for ref, e in local.items()}
    L = max(e.L for e in local.values())
    M = compute_M(tree, dec)
    N = choose_N(L, M) if force_N is None else int(force_N)
    graph = build_graph(tree, dec, 2.0**N)
    coloring = greedy_color(graph)
    constants = choose_constants(L, M, coloring.A, d, N)
    embedding = assemble(tree, dec, coloring, local, constants)
    return PipelineResult(tree, nets, dec, local, M, graph, coloring, constants, embedding)
