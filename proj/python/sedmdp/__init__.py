"""Simulation and planning for MDPs whose actions execute under stochastic delay."""

from ._core import (
    AugmentedSolution,
    Battery,
    CheckResult,
    Env,
    Mdp,
    ResourceError,
    ResultRow,
    RngStream,
    RunResult,
    StepOutcome,
    ValueSolution,
    __version__,
    augmented_vi,
    branch_gridworld,
    chain,
    effective_decision_time,
    enumerate_uniform_histories,
    gridworld,
    resolve_env,
    run_experiment,
    value_iteration,
    verify,
)

__all__ = [
    "AugmentedSolution",
    "Battery",
    "CheckResult",
    "Env",
    "Mdp",
    "ResourceError",
    "ResultRow",
    "RngStream",
    "RunResult",
    "StepOutcome",
    "ValueSolution",
    "__version__",
    "augmented_vi",
    "branch_gridworld",
    "chain",
    "effective_decision_time",
    "enumerate_uniform_histories",
    "gridworld",
    "resolve_env",
    "run_experiment",
    "value_iteration",
    "verify",
]
