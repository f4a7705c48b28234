"""Generalized 3-connectivity (kappa_3, lambda_3) of random graphs.

Exact Steiner-tree packing for small graphs, the constructive packer from
the threshold proof, structural audits and a Monte Carlo threshold lab.
"""

from .errors import Kappa3Error, PackerFailure
from .graph import (
    EDGE,
    INTERNAL,
    Graph,
    SteinerTree,
    TerminalSet,
    TreePacking,
    bfs_distances,
    edge_connectivity,
    induced_edge_count,
    min_degree,
    validate_packing,
    vertex_connectivity,
)
from .audit import audit_bad_edges, audit_dense_subsets, audit_small_distance, run_audit
from .lab import SweepSpec, chain_check, estimate_transition, fit_window, run_sweep
from .oracle import oracle_enumerate
from .packer import PackerConfig, pack
from .random_models import ModelSpec, epsilon, sample_gnm, sample_gnp, scale_D, threshold_p
from .steiner import kappa3_exact, kappa_S_exact, lambda3_exact, lambda_S_exact

__version__ = "0.1.0"

__all__ = [
    "PackerConfig",
    "PackerFailure",
    "SweepSpec",
    "audit_bad_edges",
    "audit_dense_subsets",
    "audit_small_distance",
    "chain_check",
    "estimate_transition",
    "fit_window",
    "pack",
    "run_audit",
    "run_sweep",
    "EDGE",
    "INTERNAL",
    "Graph",
    "Kappa3Error",
    "ModelSpec",
    "SteinerTree",
    "TerminalSet",
    "TreePacking",
    "bfs_distances",
    "edge_connectivity",
    "epsilon",
    "induced_edge_count",
    "kappa3_exact",
    "kappa_S_exact",
    "lambda3_exact",
    "lambda_S_exact",
    "min_degree",
    "oracle_enumerate",
    "sample_gnm",
    "sample_gnp",
    "scale_D",
    "threshold_p",
    "validate_packing",
    "vertex_connectivity",
]
