"""incvote: simulation and exact verification of discrete incremental voting.

Vertices hold integer opinions and nudge them by one toward observed
neighbours.  The package simulates the asynchronous edge/vertex and
synchronous schedulers (plus a propensity-weighted reversible kernel),
verifies the conserved weighted averages exactly, and reproduces the
winning-distribution laws against closed forms and brute-force
absorbing-chain oracles.
"""

__version__ = "0.1.0"

from .graph import (Graph, GraphStats, check_p1, check_p2, check_p3,
                    from_edges, graph_stats, make_complete, make_path,
                    sample_gnp)
from .dynamics import (OpinionState, ProcessSpec, StepRecord, TrialOutcome,
                       expected_count_drift_exact,
                       expected_generalized_change_exact,
                       expected_step_change_exact, ordered_path_opinions,
                       run_trial, step_async_edge, step_async_vertex,
                       step_generalized, step_sync_vertex)
from .kn_engine import (CountState, extreme_product_drift_async,
                        extreme_product_drift_sync, run_count_trial,
                        step_async_counts, step_sync_counts,
                        three_value_product_drift_async,
                        three_value_product_drift_sync)
from .oracle import (AbsorbingChain, build_full_process_chain, gambler_ruin,
                     path_reduced_walk_chain, solve_absorption)
from .theory import (Prediction, completion_bound, initial_average,
                     predict_expander, predict_ordered_path,
                     predict_two_value)
from .experiment import (ExperimentConfig, ExperimentSummary,
                         compare_to_prediction, extreme_elimination_audit,
                         mean_winner_audit, run_experiment,
                         small_instance_cross_validation, wilson_interval)
from .rng import make_rng, placement_rng, trial_rng

__all__ = [
    "Graph", "GraphStats", "make_complete", "make_path", "sample_gnp",
    "from_edges", "graph_stats", "check_p1", "check_p2", "check_p3",
    "OpinionState", "ProcessSpec", "StepRecord", "TrialOutcome",
    "step_async_vertex", "step_async_edge", "step_sync_vertex",
    "step_generalized", "expected_step_change_exact",
    "expected_count_drift_exact", "expected_generalized_change_exact",
    "run_trial", "ordered_path_opinions",
    "CountState", "step_sync_counts", "step_async_counts", "run_count_trial",
    "extreme_product_drift_sync", "three_value_product_drift_sync",
    "extreme_product_drift_async", "three_value_product_drift_async",
    "AbsorbingChain", "solve_absorption", "build_full_process_chain",
    "gambler_ruin", "path_reduced_walk_chain",
    "Prediction", "predict_expander", "predict_two_value",
    "predict_ordered_path", "completion_bound", "initial_average",
    "ExperimentConfig", "ExperimentSummary", "run_experiment",
    "compare_to_prediction", "mean_winner_audit",
    "extreme_elimination_audit", "small_instance_cross_validation",
    "wilson_interval", "make_rng", "trial_rng", "placement_rng",
]
