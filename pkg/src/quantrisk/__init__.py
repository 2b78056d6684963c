"""quantrisk: kill-chain risk assessment for quantum communication systems.

Catalogued attack techniques are composed into four-phase kill chains
(knowing, entering, finding, exploiting), scored step by step, aggregated
into a scenario likelihood, discretized over portfolio-wide bounds, and
rated through a 5x5 risk matrix. A CLI and an HTTP service wrap the same
engine for scripted and interactive use.
"""

from .assessment import (
    AssessmentResult,
    Comparison,
    WhatIfDiff,
    WhatIfOverride,
    assess_portfolio,
    compare_aggregations,
    weakest_step,
    what_if,
)
from .catalog import (
    AttackMechanism,
    AttackObjective,
    Catalog,
    DeploymentEnvironment,
    LifecyclePhase,
    SystemLayer,
    Technique,
    TechniqueFilter,
    load_catalog,
    query_techniques,
    serialize_catalog,
    validate_catalog,
)
from .chain import (
    ChainStep,
    ContextProfile,
    Impact,
    KillChain,
    KillChainPhase,
    Portfolio,
    build_chain,
    build_portfolio,
    load_portfolio,
    serialize_portfolio,
    validate_chain,
    validate_portfolio,
)
from .findings import Finding, ParseError, Severity, ValidationError, ValidationReport
from .scoring import (
    AggregationMethod,
    AssessmentConfig,
    LikelihoodBounds,
    RiskBand,
    RiskMatrix,
    ScenarioResult,
    adjust,
    aggregate,
    default_risk_matrix,
    discretize,
    global_bounds,
    recommend_method,
    risk_lookup,
    step_likelihood,
    step_probability,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationMethod",
    "AssessmentConfig",
    "AssessmentResult",
    "AttackMechanism",
    "AttackObjective",
    "Catalog",
    "ChainStep",
    "Comparison",
    "ContextProfile",
    "DeploymentEnvironment",
    "Finding",
    "Impact",
    "KillChain",
    "KillChainPhase",
    "LifecyclePhase",
    "LikelihoodBounds",
    "ParseError",
    "Portfolio",
    "RiskBand",
    "RiskMatrix",
    "ScenarioResult",
    "Severity",
    "SystemLayer",
    "Technique",
    "TechniqueFilter",
    "ValidationError",
    "ValidationReport",
    "WhatIfDiff",
    "WhatIfOverride",
    "adjust",
    "aggregate",
    "assess_portfolio",
    "build_chain",
    "build_portfolio",
    "compare_aggregations",
    "default_risk_matrix",
    "discretize",
    "global_bounds",
    "load_catalog",
    "load_portfolio",
    "query_techniques",
    "recommend_method",
    "risk_lookup",
    "serialize_catalog",
    "serialize_portfolio",
    "step_likelihood",
    "step_probability",
    "validate_catalog",
    "validate_chain",
    "validate_portfolio",
    "weakest_step",
    "what_if",
]
