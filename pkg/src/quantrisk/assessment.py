"""Portfolio-wide assessment orchestration and what-if recomputation.

Stateless: every function maps immutable inputs to a new result. Bounds are
computed once per assessment across the full set of chains, so overriding a
single step multiplier can legitimately move every chain's discretized
likelihood; what-if therefore always recomputes the whole portfolio.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Mapping, NamedTuple

from .catalog import Catalog
from .chain import KillChain, Portfolio, validate_portfolio
from .findings import ParseError, ValidationError
from .scoring import (
    AggregationMethod,
    AssessmentConfig,
    LikelihoodBounds,
    RiskBand,
    ScenarioResult,
    adjust,
    aggregate,
    discretize,
    global_bounds,
    risk_lookup,
    round_reported,
    step_likelihood,
)


class UnknownReferenceError(LookupError):
    """An override points at a chain or step that does not exist."""


class OverrideDomainError(ValueError):
    """An override carries a value outside the legal domain."""


class WeakestStep(NamedTuple):
    step_index: int
    likelihood: float


def weakest_step(chain: KillChain) -> WeakestStep:
    """First step index attaining the maximal likelihood contribution (ties break low)."""
    values = [step_likelihood(s.threat, s.exposure, s.multiplier) for s in chain.steps]
    best = max(values)
    return WeakestStep(step_index=values.index(best), likelihood=best)


def score_chain(chain: KillChain, bounds: LikelihoodBounds,
                config: AssessmentConfig) -> ScenarioResult:
    """Run the per-chain pipeline against already-computed portfolio bounds."""
    values = tuple(step_likelihood(s.threat, s.exposure, s.multiplier) for s in chain.steps)
    outcome = aggregate(values, config.method)
    adjusted = adjust(outcome.raw, config)
    level = discretize(adjusted, bounds, epsilon=config.boundary_epsilon)
    cell = risk_lookup(level, chain.impact.level, config.matrix)
    return ScenarioResult(
        chain_id=chain.id,
        step_likelihoods=values,
        raw_likelihood=outcome.raw,
        adjusted_likelihood=adjusted,
        discrete_likelihood=level,
        impact=chain.impact.level,
        risk_value=cell.value,
        risk_band=cell.band,
        weakest_step_index=values.index(max(values)),
        success_probability=outcome.success_probability,
    )


@dataclass(frozen=True)
class AssessmentResult:
    """Portfolio assessment: config snapshot, bounds, per-chain results, treatment flags.

    The stored config carries the resolved acceptance threshold, so the
    snapshot fully determines the result. ``timestamp`` is injected by the
    caller (and omitted from serialization when absent) to keep identical
    inputs byte-identical.
    """

    config: AssessmentConfig
    bounds: LikelihoodBounds
    scenarios: tuple[ScenarioResult, ...]
    treatment_required: tuple[str, ...]
    timestamp: str | None = None

    def scenario(self, chain_id: str) -> ScenarioResult:
        for s in self.scenarios:
            if s.chain_id == chain_id:
                return s
        raise KeyError(chain_id)

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "config": self.config.to_doc(),
            "bounds": self.bounds.to_doc(),
            "scenarios": [s.to_doc() for s in self.scenarios],
            "treatment_required": list(self.treatment_required),
        }
        if self.timestamp is not None:
            doc["timestamp"] = self.timestamp
        return doc


def serialize_result(result: AssessmentResult) -> str:
    return json.dumps(result.to_doc(), indent=2) + "\n"


def assess_portfolio(portfolio: Portfolio, catalog: Catalog, config: AssessmentConfig,
                     timestamp: str | None = None) -> AssessmentResult:
    """Assess every chain of the portfolio under one config.

    Validates the portfolio against the catalog first (errors propagate as
    :class:`ValidationError`), computes the shared bounds once, then scores
    each chain. Scenarios are ordered by descending risk value, ties by id.
    """
    if not portfolio.chains:
        raise ValueError("portfolio contains no chains")
    report = validate_portfolio(portfolio, catalog)
    if not report.ok:
        raise ValidationError(report, context="portfolio")

    threshold = config.acceptance_threshold
    if threshold is None:
        threshold = portfolio.context.acceptance_threshold
    resolved = dataclasses.replace(config, acceptance_threshold=threshold)

    bounds = global_bounds(portfolio, resolved)
    scenarios = sorted(
        (score_chain(chain, bounds, resolved) for chain in portfolio.chains.values()),
        key=lambda s: (-s.risk_value, s.chain_id),
    )
    flagged = tuple(sorted(s.chain_id for s in scenarios if s.risk_value >= threshold))
    return AssessmentResult(
        config=resolved,
        bounds=bounds,
        scenarios=tuple(scenarios),
        treatment_required=flagged,
        timestamp=timestamp,
    )


# --------------------------------------------------------------------------
# what-if overrides

@dataclass(frozen=True)
class StepOverride:
    chain_id: str
    step_index: int
    threat: int | None = None
    exposure: int | None = None
    multiplier: float | None = None


@dataclass(frozen=True)
class ImpactOverride:
    chain_id: str
    impact: int


@dataclass(frozen=True)
class WhatIfOverride:
    """A speculative edit set: method/global multiplier swaps plus step- and impact-level changes."""

    method: AggregationMethod | None = None
    global_multiplier: float | None = None
    steps: tuple[StepOverride, ...] = ()
    impacts: tuple[ImpactOverride, ...] = ()

    @property
    def empty(self) -> bool:
        return (self.method is None and self.global_multiplier is None
                and not self.steps and not self.impacts)


def _check_ordinal_override(path: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= 5:
        raise OverrideDomainError(f"{path}: must be an integer in 1..5, got {value!r}")


def _check_multiplier_override(path: str, value: Any, upper: float) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not 0 < float(value) <= upper:
        raise OverrideDomainError(f"{path}: must be in (0, {upper}], got {value!r}")


def parse_overrides(doc: Mapping[str, Any]) -> WhatIfOverride:
    """Build a WhatIfOverride from its JSON document, checking shape and domains."""
    if not isinstance(doc, Mapping):
        raise OverrideDomainError("overrides document must be a JSON object")
    unknown = set(doc) - {"method", "global_multiplier", "steps", "impacts"}
    if unknown:
        raise OverrideDomainError(f"unknown override keys: {sorted(unknown)}")

    method = None
    if doc.get("method") is not None:
        try:
            method = AggregationMethod(doc["method"])
        except ValueError:
            allowed = ", ".join(m.value for m in AggregationMethod)
            raise OverrideDomainError(f"method: must be one of {{{allowed}}}, got {doc['method']!r}") from None

    global_multiplier = doc.get("global_multiplier")
    if global_multiplier is not None:
        _check_multiplier_override("global_multiplier", global_multiplier, 2.0)
        global_multiplier = float(global_multiplier)

    steps: list[StepOverride] = []
    for i, entry in enumerate(doc.get("steps", ())):
        path = f"steps[{i}]"
        if not isinstance(entry, Mapping) or "chain_id" not in entry or "step_index" not in entry:
            raise OverrideDomainError(f"{path}: must be an object with chain_id and step_index")
        bad = set(entry) - {"chain_id", "step_index", "threat", "exposure", "multiplier"}
        if bad:
            raise OverrideDomainError(f"{path}: unknown keys {sorted(bad)}")
        index = entry["step_index"]
        if isinstance(index, bool) or not isinstance(index, int) or index < 0:
            raise OverrideDomainError(f"{path}.step_index: must be a non-negative integer, got {index!r}")
        if entry.get("threat") is not None:
            _check_ordinal_override(f"{path}.threat", entry["threat"])
        if entry.get("exposure") is not None:
            _check_ordinal_override(f"{path}.exposure", entry["exposure"])
        multiplier = entry.get("multiplier")
        if multiplier is not None:
            _check_multiplier_override(f"{path}.multiplier", multiplier, 2.0)
            multiplier = float(multiplier)
        steps.append(StepOverride(
            chain_id=entry["chain_id"], step_index=index,
            threat=entry.get("threat"), exposure=entry.get("exposure"), multiplier=multiplier,
        ))

    impacts: list[ImpactOverride] = []
    for i, entry in enumerate(doc.get("impacts", ())):
        path = f"impacts[{i}]"
        if not isinstance(entry, Mapping) or "chain_id" not in entry or "impact" not in entry:
            raise OverrideDomainError(f"{path}: must be an object with chain_id and impact")
        bad = set(entry) - {"chain_id", "impact"}
        if bad:
            raise OverrideDomainError(f"{path}: unknown keys {sorted(bad)}")
        _check_ordinal_override(f"{path}.impact", entry["impact"])
        impacts.append(ImpactOverride(chain_id=entry["chain_id"], impact=entry["impact"]))

    return WhatIfOverride(method=method, global_multiplier=global_multiplier,
                          steps=tuple(steps), impacts=tuple(impacts))


def apply_overrides(portfolio: Portfolio, config: AssessmentConfig,
                    overrides: WhatIfOverride) -> tuple[Portfolio, AssessmentConfig]:
    """Produce the edited copies a what-if run scores; originals stay untouched."""
    chains = dict(portfolio.chains)

    for i, override in enumerate(overrides.steps):
        chain = chains.get(override.chain_id)
        if chain is None:
            raise UnknownReferenceError(f"steps[{i}]: unknown chain '{override.chain_id}'")
        if not 0 <= override.step_index < len(chain.steps):
            raise UnknownReferenceError(
                f"steps[{i}]: chain '{override.chain_id}' has no step {override.step_index}")
        step = chain.steps[override.step_index]
        changes: dict[str, Any] = {}
        if override.threat is not None:
            changes["threat"] = override.threat
        if override.exposure is not None:
            changes["exposure"] = override.exposure
        if override.multiplier is not None:
            changes["multiplier"] = override.multiplier
        if changes:
            steps = list(chain.steps)
            steps[override.step_index] = dataclasses.replace(step, **changes)
            chains[chain.id] = dataclasses.replace(chain, steps=tuple(steps))

    for i, override in enumerate(overrides.impacts):
        chain = chains.get(override.chain_id)
        if chain is None:
            raise UnknownReferenceError(f"impacts[{i}]: unknown chain '{override.chain_id}'")
        impact = dataclasses.replace(chain.impact, level=override.impact)
        chains[chain.id] = dataclasses.replace(chain, impact=impact)

    modified = dataclasses.replace(portfolio, chains=chains)

    config_changes: dict[str, Any] = {}
    if overrides.method is not None:
        config_changes["method"] = overrides.method
    if overrides.global_multiplier is not None:
        config_changes["global_multiplier"] = overrides.global_multiplier
    if config_changes:
        config = dataclasses.replace(config, **config_changes)
    return modified, config


@dataclass(frozen=True)
class ChainDelta:
    """Per-chain difference between the baseline and modified assessments."""

    chain_id: str
    baseline_likelihood: int
    modified_likelihood: int
    baseline_risk: int
    modified_risk: int
    baseline_band: RiskBand
    modified_band: RiskBand

    @property
    def delta_likelihood(self) -> int:
        return self.modified_likelihood - self.baseline_likelihood

    @property
    def delta_risk(self) -> int:
        return self.modified_risk - self.baseline_risk

    @property
    def band_changed(self) -> bool:
        return self.baseline_band is not self.modified_band

    @property
    def changed(self) -> bool:
        return self.delta_likelihood != 0 or self.delta_risk != 0 or self.band_changed

    def to_doc(self) -> dict[str, Any]:
        return {
            "chain_id": self.chain_id,
            "baseline_likelihood": self.baseline_likelihood,
            "modified_likelihood": self.modified_likelihood,
            "delta_likelihood": self.delta_likelihood,
            "baseline_risk": self.baseline_risk,
            "modified_risk": self.modified_risk,
            "delta_risk": self.delta_risk,
            "baseline_band": self.baseline_band.value,
            "modified_band": self.modified_band.value,
            "band_changed": self.band_changed,
        }


@dataclass(frozen=True)
class WhatIfDiff:
    """Baseline and modified assessments plus per-chain deltas."""

    baseline: AssessmentResult
    modified: AssessmentResult
    deltas: tuple[ChainDelta, ...]
    bounds_changed: bool

    def to_doc(self) -> dict[str, Any]:
        return {
            "baseline": self.baseline.to_doc(),
            "modified": self.modified.to_doc(),
            "deltas": [d.to_doc() for d in self.deltas],
            "bounds_changed": self.bounds_changed,
        }


def what_if(portfolio: Portfolio, catalog: Catalog, config: AssessmentConfig,
            overrides: WhatIfOverride, timestamp: str | None = None) -> WhatIfDiff:
    """Apply overrides to a copy and recompute the entire portfolio, bounds included.

    Equivalent by construction to assessing a portfolio file pre-edited with
    the same overrides; the inputs are never mutated.
    """
    baseline = assess_portfolio(portfolio, catalog, config, timestamp=timestamp)
    edited_portfolio, edited_config = apply_overrides(portfolio, config, overrides)
    modified = assess_portfolio(edited_portfolio, catalog, edited_config, timestamp=timestamp)

    deltas = []
    for chain_id in sorted(portfolio.chains):
        before = baseline.scenario(chain_id)
        after = modified.scenario(chain_id)
        deltas.append(ChainDelta(
            chain_id=chain_id,
            baseline_likelihood=before.discrete_likelihood,
            modified_likelihood=after.discrete_likelihood,
            baseline_risk=before.risk_value,
            modified_risk=after.risk_value,
            baseline_band=before.risk_band,
            modified_band=after.risk_band,
        ))
    return WhatIfDiff(
        baseline=baseline,
        modified=modified,
        deltas=tuple(deltas),
        bounds_changed=baseline.bounds != modified.bounds,
    )


# --------------------------------------------------------------------------
# three-method comparison

_METHOD_ORDER = (AggregationMethod.MAXIMUM, AggregationMethod.AVERAGE,
                 AggregationMethod.GEOMETRIC_MEAN)


@dataclass(frozen=True)
class ComparisonRow:
    """One chain scored under all three aggregation methods."""

    chain_id: str
    impact: int
    outcomes: dict[AggregationMethod, ScenarioResult]

    def to_doc(self) -> dict[str, Any]:
        methods = {}
        for method in _METHOD_ORDER:
            s = self.outcomes[method]
            entry: dict[str, Any] = {
                "raw_likelihood": round_reported(s.raw_likelihood),
                "adjusted_likelihood": round_reported(s.adjusted_likelihood),
                "discrete_likelihood": s.discrete_likelihood,
                "risk_value": s.risk_value,
                "risk_band": s.risk_band.value,
            }
            methods[method.value] = entry
        return {"chain_id": self.chain_id, "impact": self.impact, "methods": methods}


@dataclass(frozen=True)
class Comparison:
    bounds: LikelihoodBounds
    rows: tuple[ComparisonRow, ...]

    def to_doc(self) -> dict[str, Any]:
        return {"bounds": self.bounds.to_doc(), "rows": [r.to_doc() for r in self.rows]}


def compare_aggregations(portfolio: Portfolio, catalog: Catalog,
                         config: AssessmentConfig) -> Comparison:
    """Score the portfolio under Maximum, Average, and GeometricMean side by side.

    Bounds do not depend on the method, so the three passes share a single
    bounds computation. Rows are ordered by chain id.
    """
    if not portfolio.chains:
        raise ValueError("portfolio contains no chains")
    report = validate_portfolio(portfolio, catalog)
    if not report.ok:
        raise ValidationError(report, context="portfolio")

    bounds = global_bounds(portfolio, config)
    configs = {method: dataclasses.replace(config, method=method) for method in _METHOD_ORDER}
    rows = tuple(
        ComparisonRow(
            chain_id=chain_id,
            impact=portfolio.chains[chain_id].impact.level,
            outcomes={
                method: score_chain(portfolio.chains[chain_id], bounds, configs[method])
                for method in _METHOD_ORDER
            },
        )
        for chain_id in sorted(portfolio.chains)
    )
    return Comparison(bounds=bounds, rows=rows)


def overrides_from_json(text: str | bytes) -> WhatIfOverride:
    """Parse an overrides file."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"overrides file is not valid JSON: {exc}") from exc
    return parse_overrides(doc)
