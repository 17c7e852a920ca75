"""Bi-Lipschitz embeddings of quasiconformal trees into Euclidean space.

The pipeline normalizes a finite metric tree, builds a leaf-net hierarchy and
its piece decomposition, embeds every piece locally, colors a proximity graph
of pieces, and assembles the local maps into disjoint coordinate blocks.
Every step can be audited numerically (see :mod:`qctree.verify`).
"""
from .assemble import GlobalConstants, GlobalEmbedding, assemble, choose_constants, choose_N
from .coloring import Coloring, ProximityGraph, build_graph, greedy_color
from .generators import GeneratorSpec, generate
from .local import EmbeddingFailure, LocalEmbedConfig, LocalEmbedding, embed_piece
from .nets import Decomposition, NetHierarchy, Piece, build_nets, compute_M, decompose, traversal
from .pipeline import PipelineResult, run_pipeline
from .tree import MetricTree, TreeValidationError, gate, leaves, normalize, path, turning_constant
from .verify import audit_all, measure_distortion

__version__ = "0.1.0"

__all__ = [
    "Coloring", "Decomposition", "EmbeddingFailure", "GeneratorSpec", "GlobalConstants", "GlobalEmbedding",
    "LocalEmbedConfig", "LocalEmbedding", "MetricTree", "NetHierarchy", "Piece", "PipelineResult",
    "ProximityGraph", "TreeValidationError", "assemble", "audit_all", "build_graph", "build_nets",
    "choose_N", "choose_constants", "compute_M", "decompose", "embed_piece", "gate", "generate",
    "greedy_color", "leaves", "measure_distortion", "normalize", "path", "run_pipeline", "traversal",
    "turning_constant",
]
