"""Sketch-based influence estimation and maximization on multi-instance cascade graphs."""

__version__ = "0.1.0"

from .confidence import ErrorLedger, IterationRecord, accumulate_ledger, discrepancy_confidence, union_bound_curve
from .exact import brute_force_optimum, degree_baseline, exact_greedy, exact_influence, prefix_influences
from .graph import (
    BaseGraph,
    EdgeListError,
    ICModel,
    MultiInstanceGraph,
    assign_uniform,
    assign_weighted_cascade,
    load_edge_list,
    read_instances,
    sample_instances,
    write_instances,
)
from .maximizer import ResidualState, advance_sketch_building, apply_residual, skim_run, verify_residual
from .ranks import RankAssignment, build_rank_assignment, to_uniform_rank
from .results import InfluenceValue, SeedSequence, seed_csv
from .sketches import (
    CombinedSketch,
    SketchSet,
    build_sketches,
    estimate_cardinality,
    estimate_cardinality_continuous,
    estimate_influence_limit,
    query_influence,
    read_sketches,
    write_sketches,
)
