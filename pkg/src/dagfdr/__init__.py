"""Top-down false-discovery-rate control for hypotheses arranged on a DAG."""

from .baselines import bh, by
from .combine import CombineMethod, fisher, propagate_intersection, simes, stouffer
from .counts import (
    EffectiveCounts,
    compute_effective_counts,
    effective_discoveries,
    verify_conservation,
)
from .graph import DagGraph, ValidationReport, build_graph, testable_frontier, topo_order, validate
from .procedure import DaggerConfig, DaggerResult, fdp_against_truth, run_batch, run_sequential
from .reshape import ReshapeFn, evaluate, make_by_global, make_dagger_by, make_discrete, make_identity
from .stepup import DepthCandidate, DepthOutcome, run_depth, run_depth_bruteforce, threshold

__version__ = "0.1.0"

__all__ = [
    "bh",
    "build_graph",
    "by",
    "CombineMethod",
    "compute_effective_counts",
    "DaggerConfig",
    "DaggerResult",
    "DagGraph",
    "DepthCandidate",
    "DepthOutcome",
    "effective_discoveries",
    "EffectiveCounts",
    "evaluate",
    "fdp_against_truth",
    "fisher",
    "make_by_global",
    "make_dagger_by",
    "make_discrete",
    "make_identity",
    "propagate_intersection",
    "ReshapeFn",
    "run_batch",
    "run_depth",
    "run_depth_bruteforce",
    "run_sequential",
    "simes",
    "stouffer",
    "testable_frontier",
    "threshold",
    "topo_order",
    "validate",
    "ValidationReport",
    "verify_conservation",
]
