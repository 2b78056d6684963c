"""Kill chains: ordered, phase-annotated sequences of scored technique steps.

Unlike catalogs (bulk-loaded documents validated into findings), chains are
analyst-authored value objects: constructors fail fast on any invariant
violation, so a ``KillChain`` instance is valid by construction. Portfolio
files still go through document-level validation with path-tagged findings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from .catalog import SCORE_MAX, SCORE_MIN, Catalog
from .findings import Collector, ParseError, ValidationError, ValidationReport

#: Upper bound for the per-step multiplier; the multiplier must be strictly positive.
STEP_MULTIPLIER_MAX = 2.0

#: Steps whose threat or exposure deviates from catalog defaults by at least
#: this many levels draw a validation warning.
DEVIATION_WARNING_LEVELS = 2


class KillChainPhase(str, Enum):
    """The four phases of a kill chain, in canonical progression order."""

    KNOWING = "knowing"
    ENTERING = "entering"
    FINDING = "finding"
    EXPLOITING = "exploiting"

    @property
    def rank(self) -> int:
        return _PHASE_RANK[self]

    def __lt__(self, other: object) -> bool:
        if isinstance(other, KillChainPhase):
            return self.rank < other.rank
        return NotImplemented

    def __le__(self, other: object) -> bool:
        if isinstance(other, KillChainPhase):
            return self.rank <= other.rank
        return NotImplemented


_PHASE_RANK = {phase: i for i, phase in enumerate(KillChainPhase)}


def _require_score(name: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not SCORE_MIN <= value <= SCORE_MAX:
        raise ValueError(f"{name} must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {value!r}")
    return value


@dataclass(frozen=True)
class ChainStep:
    """One scored step of a kill chain referencing a catalog technique.

    ``threat`` and ``exposure`` are 1-5 ordinals; ``multiplier`` encodes a
    step-specific hindrance or amplification and lies in (0, 2].
    """

    technique_id: str
    phase: KillChainPhase
    threat: int
    exposure: int
    multiplier: float = 1.0
    note: str = ""

    def __post_init__(self) -> None:
        if not self.technique_id:
            raise ValueError("technique_id must be a non-empty string")
        if not isinstance(self.phase, KillChainPhase):
            raise ValueError(f"phase must be a KillChainPhase, got {self.phase!r}")
        _require_score("threat", self.threat)
        _require_score("exposure", self.exposure)
        m = self.multiplier
        if isinstance(m, bool) or not isinstance(m, (int, float)):
            raise ValueError(f"multiplier must be a number, got {m!r}")
        if not 0.0 < float(m) <= STEP_MULTIPLIER_MAX:
            raise ValueError(f"multiplier must be in (0, {STEP_MULTIPLIER_MAX}], got {m!r}")
        object.__setattr__(self, "multiplier", float(m))


@dataclass(frozen=True)
class Impact:
    """Scenario-level consequence of the full kill chain succeeding (1-5 ordinal)."""

    level: int
    rationale: str = ""

    def __post_init__(self) -> None:
        _require_score("impact level", self.level)


@dataclass(frozen=True)
class KillChain:
    """An ordered, non-empty sequence of steps with non-decreasing phases plus a scenario impact."""

    id: str
    name: str
    steps: tuple[ChainStep, ...]
    impact: Impact
    description: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("chain id must be a non-empty string")
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("chain must contain at least one step")
        for i in range(1, len(self.steps)):
            if self.steps[i].phase.rank < self.steps[i - 1].phase.rank:
                raise ValueError(
                    f"phase order violation at step {i}: "
                    f"{self.steps[i].phase.value} after {self.steps[i - 1].phase.value}"
                )


def build_chain(id: str, name: str, steps: Iterable[ChainStep], impact: Impact,
                description: str = "") -> KillChain:
    """Assemble a kill chain, raising ``ValueError`` on any invariant violation."""
    return KillChain(id=id, name=name, steps=tuple(steps), impact=impact, description=description)


@dataclass(frozen=True)
class Role:
    """Assignment of one responsibility in the assessment process."""

    role: str
    responsibility: str


@dataclass(frozen=True)
class ContextProfile:
    """Organisational context: scope, acceptance threshold, and responsibilities.

    ``acceptance_threshold`` is the numeric risk rating at or above which
    treatment is required (1..25).
    """

    scope: str = ""
    acceptance_threshold: int = 8
    roles: tuple[Role, ...] = ()

    def __post_init__(self) -> None:
        t = self.acceptance_threshold
        if isinstance(t, bool) or not isinstance(t, int) or not 1 <= t <= 25:
            raise ValueError(f"acceptance_threshold must be an integer in 1..25, got {t!r}")


@dataclass(frozen=True)
class Portfolio:
    """The full set of kill chains under evaluation, plus context metadata."""

    context: ContextProfile
    catalog_version: str = ""
    chains: dict[str, KillChain] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, chain in self.chains.items():
            if key != chain.id:
                raise ValueError(f"chain keyed as '{key}' but chain id is '{chain.id}'")


def build_portfolio(context: ContextProfile, catalog_version: str,
                    chains: Iterable[KillChain]) -> Portfolio:
    """Key chains by id, rejecting duplicates."""
    by_id: dict[str, KillChain] = {}
    for chain in chains:
        if chain.id in by_id:
            raise ValueError(f"duplicate chain id '{chain.id}'")
        by_id[chain.id] = chain
    return Portfolio(context=context, catalog_version=catalog_version, chains=by_id)


# --------------------------------------------------------------------------
# cross-validation against a catalog

def validate_chain(chain: KillChain, catalog: Catalog) -> ValidationReport:
    """Bind a chain against a catalog: unresolved technique ids are errors,
    large deviations from the technique's default scores are warnings."""
    out = Collector()
    for i, step in enumerate(chain.steps):
        technique = catalog.get(step.technique_id)
        if technique is None:
            out.error(f"steps[{i}].technique_id",
                      f"technique '{step.technique_id}' not found in catalog")
            continue
        if abs(step.threat - technique.default_threat) >= DEVIATION_WARNING_LEVELS:
            out.warning(f"steps[{i}].threat",
                        f"threat {step.threat} deviates from catalog default "
                        f"{technique.default_threat} by {abs(step.threat - technique.default_threat)} levels")
        if abs(step.exposure - technique.default_exposure) >= DEVIATION_WARNING_LEVELS:
            out.warning(f"steps[{i}].exposure",
                        f"exposure {step.exposure} deviates from catalog default "
                        f"{technique.default_exposure} by {abs(step.exposure - technique.default_exposure)} levels")
    return out.report()


def validate_portfolio(portfolio: Portfolio, catalog: Catalog) -> ValidationReport:
    """Validate every chain of the portfolio against the catalog."""
    out = Collector()
    if portfolio.catalog_version and portfolio.catalog_version != catalog.version:
        out.warning("catalog_version",
                    f"portfolio was authored against catalog version '{portfolio.catalog_version}' "
                    f"but the loaded catalog is '{catalog.version}'")
    for chain_id, chain in portfolio.chains.items():
        report = validate_chain(chain, catalog)
        for finding in report.findings:
            getattr(out, finding.severity.value)(f"chains[{chain_id}].{finding.path}", finding.message)
    return out.report()


# --------------------------------------------------------------------------
# document (de)serialization

def _check_number(out: Collector, path: str, value: Any) -> bool:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        out.error(path, f"must be a number, got {value!r}")
        return False
    return True


def validate_step_doc(doc: Any, path: str, strict: bool = True) -> ValidationReport:
    out = Collector()
    if not isinstance(doc, dict):
        out.error(path, "step must be an object")
        return out.report()
    required = ("technique_id", "phase", "threat", "exposure", "multiplier")
    missing = [k for k in required if k not in doc]
    for key in missing:
        out.error(path, f"missing required key '{key}'")
    if strict:
        for key in sorted(set(doc) - set(required) - {"note"}):
            out.error(f"{path}.{key}", "unknown key (strict mode; pass lenient to ignore)")
    if missing:
        return out.report()
    if not isinstance(doc["technique_id"], str) or not doc["technique_id"]:
        out.error(f"{path}.technique_id", "must be a non-empty string")
    try:
        KillChainPhase(doc["phase"])
    except ValueError:
        allowed = ", ".join(p.value for p in KillChainPhase)
        out.error(f"{path}.phase", f"must be one of {{{allowed}}}, got {doc['phase']!r}")
    for key in ("threat", "exposure"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or not SCORE_MIN <= v <= SCORE_MAX:
            out.error(f"{path}.{key}", f"must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {v!r}")
    if _check_number(out, f"{path}.multiplier", doc["multiplier"]):
        if not 0 < float(doc["multiplier"]) <= STEP_MULTIPLIER_MAX:
            out.error(f"{path}.multiplier",
                      f"must be in (0, {STEP_MULTIPLIER_MAX}], got {doc['multiplier']!r}")
    if "note" in doc and not isinstance(doc["note"], str):
        out.error(f"{path}.note", "must be a string")
    return out.report()


def validate_chain_doc(doc: Any, path: str = "$", strict: bool = True) -> ValidationReport:
    """Schema-check one chain document, including phase ordering."""
    out = Collector()
    if not isinstance(doc, dict):
        out.error(path, "chain must be an object")
        return out.report()
    required = ("id", "name", "steps", "impact")
    missing = [k for k in required if k not in doc]
    for key in missing:
        out.error(path, f"missing required key '{key}'")
    if strict:
        for key in sorted(set(doc) - set(required) - {"description"}):
            out.error(f"{path}.{key}", "unknown key (strict mode; pass lenient to ignore)")
    if missing:
        return out.report()
    if not isinstance(doc["id"], str) or not doc["id"]:
        out.error(f"{path}.id", "must be a non-empty string")
    if not isinstance(doc["name"], str):
        out.error(f"{path}.name", "must be a string")
    impact = doc["impact"]
    if not isinstance(impact, dict) or "level" not in impact:
        out.error(f"{path}.impact", "must be an object with a 'level' key")
    else:
        level = impact["level"]
        if isinstance(level, bool) or not isinstance(level, int) or not SCORE_MIN <= level <= SCORE_MAX:
            out.error(f"{path}.impact.level",
                      f"must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {level!r}")
        if "rationale" in impact and not isinstance(impact["rationale"], str):
            out.error(f"{path}.impact.rationale", "must be a string")
        if strict:
            for key in sorted(set(impact) - {"level", "rationale"}):
                out.error(f"{path}.impact.{key}", "unknown key (strict mode; pass lenient to ignore)")
    if not isinstance(doc["steps"], list) or not doc["steps"]:
        out.error(f"{path}.steps", "must be a non-empty list of steps")
        return out.report()
    previous_rank = -1
    for i, step in enumerate(doc["steps"]):
        out.extend(validate_step_doc(step, f"{path}.steps[{i}]", strict=strict))
        if isinstance(step, dict):
            try:
                rank = KillChainPhase(step.get("phase")).rank
            except ValueError:
                continue
            if rank < previous_rank:
                out.error(f"{path}.steps[{i}].phase",
                          f"phase order violation: {step['phase']} after a later phase")
            previous_rank = max(previous_rank, rank)
    return out.report()


def validate_portfolio_document(doc: Any, strict: bool = True) -> ValidationReport:
    out = Collector()
    if not isinstance(doc, dict):
        out.error("$", f"portfolio document must be a JSON object, got {type(doc).__name__}")
        return out.report()
    required = ("context", "catalog_version", "chains")
    missing = [k for k in required if k not in doc]
    for key in missing:
        out.error("$", f"missing required key '{key}'")
    if strict:
        for key in sorted(set(doc) - set(required)):
            out.error(f"$.{key}", "unknown key (strict mode; pass lenient to ignore)")
    if missing:
        return out.report()

    context = doc["context"]
    if not isinstance(context, dict):
        out.error("context", "must be an object")
    else:
        if strict:
            for key in sorted(set(context) - {"scope", "acceptance_threshold", "roles"}):
                out.error(f"context.{key}", "unknown key (strict mode; pass lenient to ignore)")
        if "scope" in context and not isinstance(context["scope"], str):
            out.error("context.scope", "must be a string")
        threshold = context.get("acceptance_threshold", 8)
        if isinstance(threshold, bool) or not isinstance(threshold, int) or not 1 <= threshold <= 25:
            out.error("context.acceptance_threshold",
                      f"must be an integer in 1..25, got {threshold!r}")
        roles = context.get("roles", [])
        if not isinstance(roles, list):
            out.error("context.roles", "must be a list")
        else:
            for i, role in enumerate(roles):
                if (not isinstance(role, dict) or not isinstance(role.get("role"), str)
                        or not isinstance(role.get("responsibility"), str)):
                    out.error(f"context.roles[{i}]",
                              "must be an object {role, responsibility} of strings")

    if not isinstance(doc["catalog_version"], str):
        out.error("catalog_version", "must be a string")

    if not isinstance(doc["chains"], list):
        out.error("chains", "must be a list")
    else:
        seen: set[str] = set()
        for i, chain in enumerate(doc["chains"]):
            out.extend(validate_chain_doc(chain, f"chains[{i}]", strict=strict))
            if isinstance(chain, dict) and isinstance(chain.get("id"), str):
                if chain["id"] in seen:
                    out.error(f"chains[{i}].id", f"duplicate chain id '{chain['id']}'")
                seen.add(chain["id"])
    return out.report()


def step_from_doc(doc: Mapping[str, Any]) -> ChainStep:
    return ChainStep(
        technique_id=doc["technique_id"],
        phase=KillChainPhase(doc["phase"]),
        threat=doc["threat"],
        exposure=doc["exposure"],
        multiplier=float(doc["multiplier"]),
        note=doc.get("note", ""),
    )


def chain_from_doc(doc: Mapping[str, Any]) -> KillChain:
    impact_doc = doc["impact"]
    return KillChain(
        id=doc["id"],
        name=doc["name"],
        steps=tuple(step_from_doc(s) for s in doc["steps"]),
        impact=Impact(level=impact_doc["level"], rationale=impact_doc.get("rationale", "")),
        description=doc.get("description", ""),
    )


def step_to_doc(step: ChainStep) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "technique_id": step.technique_id,
        "phase": step.phase.value,
        "threat": step.threat,
        "exposure": step.exposure,
        "multiplier": step.multiplier,
    }
    if step.note:
        doc["note"] = step.note
    return doc


def chain_to_doc(chain: KillChain) -> dict[str, Any]:
    return {
        "id": chain.id,
        "name": chain.name,
        "description": chain.description,
        "impact": {"level": chain.impact.level, "rationale": chain.impact.rationale},
        "steps": [step_to_doc(s) for s in chain.steps],
    }


def portfolio_to_doc(portfolio: Portfolio) -> dict[str, Any]:
    return {
        "context": {
            "scope": portfolio.context.scope,
            "acceptance_threshold": portfolio.context.acceptance_threshold,
            "roles": [{"role": r.role, "responsibility": r.responsibility}
                      for r in portfolio.context.roles],
        },
        "catalog_version": portfolio.catalog_version,
        "chains": [chain_to_doc(c) for c in portfolio.chains.values()],
    }


def load_portfolio(document: str | bytes | Mapping[str, Any], strict: bool = True) -> Portfolio:
    """Parse and validate a portfolio document; all-or-nothing like :func:`quantrisk.catalog.load_catalog`."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"portfolio is not valid JSON: {exc}") from exc
    else:
        doc = document

    report = validate_portfolio_document(doc, strict=strict)
    if not report.ok:
        raise ValidationError(report, context="portfolio")

    context_doc = doc["context"]
    context = ContextProfile(
        scope=context_doc.get("scope", ""),
        acceptance_threshold=context_doc.get("acceptance_threshold", 8),
        roles=tuple(Role(role=r["role"], responsibility=r["responsibility"])
                    for r in context_doc.get("roles", [])),
    )
    return build_portfolio(context, doc["catalog_version"],
                           (chain_from_doc(c) for c in doc["chains"]))


def serialize_portfolio(portfolio: Portfolio) -> str:
    return json.dumps(portfolio_to_doc(portfolio), indent=2) + "\n"
