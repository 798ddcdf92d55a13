"""Pareto-front representations for multicriteria strategic asset allocation.

The engine evaluates four criteria (expected return, volatility, a solvency
ratio composed from the regulatory market-risk chain, and l1 turnover
distance to a reference portfolio), scalarizes them with weighted
Tchebycheff programs, and refines an adaptive box decomposition of the
objective space until a well-spread representation of the Pareto front is
archived. It is usable as a library, an sklearn-style estimator, a CLI, and
an HTTP service.
"""
from .boxes import BoxRegion, DegenerateBoxError, LocalBoundSets, new_lower_bounds, new_upper_bounds, select_box
from .engine import (
    InfeasibleError,
    IterationLog,
    PortfolioRecord,
    RepresentationArchive,
    RunConfig,
    payoff_table,
    restrict_and_rerun,
    run,
)
from .estimators import BoxFrontExplorer, ObjectiveEvaluator
from .model import (
    CANONICAL_OBJECTIVES,
    AssetUniverse,
    GroupConstraint,
    ModelSpec,
    Objective,
    ObjectiveBound,
    PortfolioWeights,
    Sense,
    SolvencyCalibration,
    Violation,
    validate_model,
)
from .objectives import (
    ObjectiveVector,
    aggregate_risks,
    constant_risk_adjust,
    evaluate_all,
    evaluate_batch,
    l1_distance,
    market_risk,
    net_risk,
    portfolio_return,
    portfolio_volatility,
    solvency_ratio,
)
from .problem import MultiObjectiveProblem, from_model
from .scalarize import (
    ScalarProblem,
    TchebycheffParams,
    build_epsilon_constraint,
    build_tchebycheff,
    build_weighted_sum,
    tchebycheff_vertex,
    tchebycheff_weights,
)
from .solver import SolverConfig, SolverResult, SolverStatus, feasible_start, solve

__version__ = "0.1.0"

__all__ = [
    "AssetUniverse",
    "BoxFrontExplorer",
    "BoxRegion",
    "CANONICAL_OBJECTIVES",
    "DegenerateBoxError",
    "GroupConstraint",
    "InfeasibleError",
    "IterationLog",
    "LocalBoundSets",
    "ModelSpec",
    "MultiObjectiveProblem",
    "Objective",
    "ObjectiveBound",
    "ObjectiveEvaluator",
    "ObjectiveVector",
    "PortfolioRecord",
    "PortfolioWeights",
    "RepresentationArchive",
    "RunConfig",
    "ScalarProblem",
    "Sense",
    "SolverConfig",
    "SolverResult",
    "SolverStatus",
    "SolvencyCalibration",
    "TchebycheffParams",
    "Violation",
    "aggregate_risks",
    "build_epsilon_constraint",
    "build_tchebycheff",
    "build_weighted_sum",
    "constant_risk_adjust",
    "evaluate_all",
    "evaluate_batch",
    "feasible_start",
    "from_model",
    "l1_distance",
    "market_risk",
    "net_risk",
    "new_lower_bounds",
    "new_upper_bounds",
    "payoff_table",
    "portfolio_return",
    "portfolio_volatility",
    "restrict_and_rerun",
    "run",
    "select_box",
    "solve",
    "solvency_ratio",
    "tchebycheff_vertex",
    "tchebycheff_weights",
    "validate_model",
]
