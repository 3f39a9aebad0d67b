"""Nonparametric bandits with covariates.

Successive elimination on a static arm set, its binned and adaptively
binned extensions for covariate problems, synthetic machines, and a
seeded simulation harness with regret traces and scaling fits.
"""

from .machines import (
    CovariateLaw,
    CovariateMachine,
    MachineClassParams,
    RewardLaw,
    StaticMachine,
    best_mean,
    build_machine,
    check_smoothness,
    draw_covariate,
    draw_reward,
    estimate_margin_prob,
    make_power_gap_machine,
    oracle_arm,
    second_best_mean,
)
from .partition import AdaptiveTree, BinId, bin_of, burst
from .policies import (
    ABSEPolicy,
    BSEPolicy,
    DoublingPolicy,
    bin_gap_constant,
    bins_per_side,
    episode_index,
    is_episode_start,
    max_tree_depth,
    rounds_before_burst,
)
from .se import (
    AlternationError,
    SEConfig,
    SEState,
    UCBPolicy,
    confidence_radius,
    floored_log,
)
from .harness import (
    RegretTrace,
    RunConfig,
    RunSummary,
    ScalingFit,
    aggregate_traces,
    build_policy,
    default_checkpoints,
    fit_scaling_exponent,
    peeling_check,
    run_many,
    run_once,
    run_sweep,
    static_regret_bound,
    theory_slope,
    write_trace_csv,
)

__all__ = [
    "ABSEPolicy",
    "AdaptiveTree",
    "AlternationError",
    "BSEPolicy",
    "BinId",
    "CovariateLaw",
    "CovariateMachine",
    "DoublingPolicy",
    "MachineClassParams",
    "RegretTrace",
    "RewardLaw",
    "RunConfig",
    "RunSummary",
    "SEConfig",
    "SEState",
    "ScalingFit",
    "StaticMachine",
    "UCBPolicy",
    "aggregate_traces",
    "best_mean",
    "bin_gap_constant",
    "bin_of",
    "bins_per_side",
    "build_machine",
    "build_policy",
    "burst",
    "check_smoothness",
    "confidence_radius",
    "default_checkpoints",
    "draw_covariate",
    "draw_reward",
    "episode_index",
    "estimate_margin_prob",
    "fit_scaling_exponent",
    "floored_log",
    "is_episode_start",
    "make_power_gap_machine",
    "max_tree_depth",
    "oracle_arm",
    "peeling_check",
    "rounds_before_burst",
    "run_many",
    "run_once",
    "run_sweep",
    "second_best_mean",
    "static_regret_bound",
    "theory_slope",
    "write_trace_csv",
]

__version__ = "0.1.0"
