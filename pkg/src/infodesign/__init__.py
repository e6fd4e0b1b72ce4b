"""Optimal information design for non-atomic Bayesian routing games."""
from .equilibrium import (
    EquilibriumError,
    EquilibriumResult,
    FirstBestResult,
    bne_indirect,
    first_best,
    nonparticipant_flow,
    prior_equilibrium,
    social_cost,
)
from .estimators import (
    BayesNashFlow,
    DiagonalSignalDesigner,
    FirstBest,
    PrivateSignalDesigner,
    PublicSignalDesigner,
)
from .private_design import (
    AtomicPrivatePolicy,
    DesignError,
    DesignSolution,
    PosteriorTable,
    atom_bound,
    extend_policy,
    lift_public_to_private,
    no_information_policy,
    obedience_residuals,
    optimize_diagonal,
    optimize_private,
    posteriors,
    sweep_nu,
)
from .public_design import PublicPolicy, canonical_policy, evaluate_public, optimize_public, public_residuals
from .scenario import (
    BUILTIN_SCENARIOS,
    LatencyPolynomial,
    RoutingScenario,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    builtin,
    link_flows,
    load_scenario,
    parallel_scenario,
    route_latency,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicPrivatePolicy",
    "BUILTIN_SCENARIOS",
    "BayesNashFlow",
    "DesignError",
    "DesignSolution",
    "DiagonalSignalDesigner",
    "EquilibriumError",
    "EquilibriumResult",
    "FirstBest",
    "FirstBestResult",
    "LatencyPolynomial",
    "PosteriorTable",
    "PrivateSignalDesigner",
    "PublicPolicy",
    "PublicSignalDesigner",
    "RoutingScenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "atom_bound",
    "bne_indirect",
    "builtin",
    "canonical_policy",
    "evaluate_public",
    "extend_policy",
    "first_best",
    "lift_public_to_private",
    "link_flows",
    "load_scenario",
    "no_information_policy",
    "nonparticipant_flow",
    "obedience_residuals",
    "optimize_diagonal",
    "optimize_private",
    "optimize_public",
    "parallel_scenario",
    "posteriors",
    "prior_equilibrium",
    "public_residuals",
    "route_latency",
    "save_scenario",
    "social_cost",
    "sweep_nu",
]
