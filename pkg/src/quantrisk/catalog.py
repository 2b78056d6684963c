"""Technique catalog: a taxonomy-classified knowledge base of attacks on quantum communication systems.

A catalog is loaded from a JSON document, validated all-or-nothing, and treated
as immutable afterwards (mutation = load a new version). The dataclasses here
are permissive containers; every invariant is enforced at the load boundary and
re-checkable via :func:`validate_catalog`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from .findings import Collector, ParseError, ValidationError, ValidationReport

SCORE_MIN = 1
SCORE_MAX = 5

#: Tactic vocabulary shipped with the default catalogs. Tactic ids are free-form
#: catalog data; this set covers the stages used by the bundled kill chains.
DEFAULT_TACTICS = (
    ("reconnaissance", "Reconnaissance", "Gathering information about the target system."),
    ("resource-development", "Resource Development", "Building or acquiring attack capabilities."),
    ("initial-access", "Initial Access", "Gaining a first foothold on a system component."),
    ("execution", "Execution", "Running the attack against the live system."),
    ("collection", "Collection", "Gathering key material, signals, or data of interest."),
    ("exfiltration", "Exfiltration", "Moving captured material out of the target environment."),
    ("impact", "Impact", "Abusing the outcome to harm the system or its users."),
)


class AttackObjective(str, Enum):
    """What the adversary ultimately gains; destruction and extraction split into distinct leaves."""

    PHYSICAL_DESTRUCTION = "physical-destruction"
    LOGICAL_DESTRUCTION = "logical-destruction"
    DENIAL_OF_SERVICE = "denial-of-service"
    FULL_KEY_OR_DATA_EXTRACTION = "full-key-or-data-extraction"
    PARTIAL_KEY_OR_DATA_EXTRACTION = "partial-key-or-data-extraction"
    REDUCING_SECURITY = "reducing-security"


class AttackMechanism(str, Enum):
    """Dominant operational domain of the technique."""

    QUANTUM_DOMINANT = "quantum-dominant"
    CLASSICAL_DOMINANT = "classical-dominant"
    CROSS_LAYER_HYBRID = "cross-layer-hybrid"


class DeploymentEnvironment(str, Enum):
    """Transmission medium the technique applies to; ``BOTH`` covers medium-agnostic techniques."""

    FIBRE_BASED = "fibre-based"
    FREE_SPACE = "free-space"
    BOTH = "both"


class LifecyclePhase(str, Enum):
    """Stage of the target system's lifecycle during which the technique applies."""

    SUPPLY_CHAIN = "supply-chain"
    DEPLOYMENT = "deployment"
    OPERATIONAL = "operational"
    DECOMMISSIONING = "decommissioning"


class SystemLayer(str, Enum):
    """Target system layer the technique touches."""

    PHYSICAL = "physical"
    PROTOCOL = "protocol"
    APPLICATION = "application"


#: Reference descriptions for the 1-5 adversary-capability tiers (mirrors the threat scale).
CAPABILITY_TIERS = {
    1: "Commodity tools and basic skills suffice",
    2: "Modest tool set with some optical or hacking skill",
    3: "Strong classical tooling, early quantum capability",
    4: "Dedicated quantum hardware and expert staff",
    5: "State-level programme with frontier research capacity",
}


@dataclass(frozen=True)
class TacticDefinition:
    """One entry of the catalog's tactic vocabulary."""

    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class Technique:
    """A catalogued attack step with its taxonomy profile and default scores.

    Invariants (enforced by :func:`load_catalog`, re-checkable via
    :func:`validate_catalog`): unique ``id``; non-empty ``tactics`` resolving
    against the catalog vocabulary; ``capability``, ``default_threat`` and
    ``default_exposure`` in 1..5. The default scores describe a typical
    environment; kill-chain steps may override them per deployment context.
    """

    id: str
    name: str
    tactics: tuple[str, ...]
    objective: AttackObjective
    mechanism: AttackMechanism
    environment: DeploymentEnvironment
    capability: int
    lifecycle: LifecyclePhase
    layer: SystemLayer
    default_threat: int
    default_exposure: int
    description: str = ""
    indicators: tuple[str, ...] = ()
    countermeasures: tuple[str, ...] = ()


@dataclass(frozen=True)
class Catalog:
    """Immutable collection of techniques plus the tactic vocabulary they reference."""

    version: str
    tactic_definitions: dict[str, TacticDefinition] = field(default_factory=dict)
    techniques: dict[str, Technique] = field(default_factory=dict)

    def get(self, technique_id: str) -> Technique | None:
        return self.techniques.get(technique_id)

    def __contains__(self, technique_id: str) -> bool:
        return technique_id in self.techniques


@dataclass(frozen=True)
class TechniqueFilter:
    """Conjunctive partial predicate over taxonomy fields plus tactic membership."""

    objective: AttackObjective | None = None
    mechanism: AttackMechanism | None = None
    environment: DeploymentEnvironment | None = None
    lifecycle: LifecyclePhase | None = None
    layer: SystemLayer | None = None
    capability: int | None = None
    tactic: str | None = None

    def matches(self, technique: Technique) -> bool:
        if self.objective is not None and technique.objective is not self.objective:
            return False
        if self.mechanism is not None and technique.mechanism is not self.mechanism:
            return False
        if self.environment is not None and technique.environment is not self.environment:
            return False
        if self.lifecycle is not None and technique.lifecycle is not self.lifecycle:
            return False
        if self.layer is not None and technique.layer is not self.layer:
            return False
        if self.capability is not None and technique.capability != self.capability:
            return False
        if self.tactic is not None and self.tactic not in technique.tactics:
            return False
        return True


# --------------------------------------------------------------------------
# document validation helpers

_ENUM_FIELDS = {
    "objective": AttackObjective,
    "mechanism": AttackMechanism,
    "environment": DeploymentEnvironment,
    "lifecycle": LifecyclePhase,
    "layer": SystemLayer,
}

_TECHNIQUE_REQUIRED = (
    "id", "name", "tactics", "objective", "mechanism", "environment",
    "capability", "lifecycle", "layer", "default_threat", "default_exposure",
)
_TECHNIQUE_OPTIONAL = ("description", "indicators", "countermeasures")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_score(out: Collector, path: str, value: Any) -> bool:
    if not _is_int(value) or not SCORE_MIN <= value <= SCORE_MAX:
        out.error(path, f"must be an integer in {SCORE_MIN}..{SCORE_MAX}, got {value!r}")
        return False
    return True


def _check_str(out: Collector, path: str, value: Any, allow_empty: bool = True) -> bool:
    if not isinstance(value, str) or (not allow_empty and not value):
        out.error(path, f"must be a{'' if allow_empty else ' non-empty'} string, got {value!r}")
        return False
    return True


def _check_str_list(out: Collector, path: str, value: Any) -> bool:
    if not isinstance(value, list) or any(not isinstance(item, str) for item in value):
        out.error(path, f"must be a list of strings, got {value!r}")
        return False
    return True


def _check_keys(out: Collector, path: str, doc: Mapping, required: Iterable[str],
                optional: Iterable[str], strict: bool) -> bool:
    complete = True
    for key in required:
        if key not in doc:
            out.error(path, f"missing required key '{key}'")
            complete = False
    if strict:
        allowed = set(required) | set(optional)
        for key in sorted(set(doc) - allowed):
            out.error(f"{path}.{key}", "unknown key (strict mode; pass lenient to ignore)")
    return complete


def _validate_enum(out: Collector, path: str, value: Any, enum_cls: type[Enum]) -> bool:
    try:
        enum_cls(value)
        return True
    except ValueError:
        allowed = ", ".join(member.value for member in enum_cls)
        out.error(path, f"must be one of {{{allowed}}}, got {value!r}")
        return False


def _validate_technique_doc(out: Collector, path: str, doc: Any, known_tactics: set[str],
                            strict: bool) -> None:
    if not isinstance(doc, dict):
        out.error(path, f"technique must be an object, got {type(doc).__name__}")
        return
    if not _check_keys(out, path, doc, _TECHNIQUE_REQUIRED, _TECHNIQUE_OPTIONAL, strict):
        return
    _check_str(out, f"{path}.id", doc["id"], allow_empty=False)
    _check_str(out, f"{path}.name", doc["name"])
    if _check_str_list(out, f"{path}.tactics", doc["tactics"]):
        if not doc["tactics"]:
            out.error(f"{path}.tactics", "technique must reference at least one tactic")
        for j, tactic_id in enumerate(doc["tactics"]):
            if tactic_id not in known_tactics:
                out.error(f"{path}.tactics[{j}]", f"unknown tactic '{tactic_id}'")
    for key, enum_cls in _ENUM_FIELDS.items():
        _validate_enum(out, f"{path}.{key}", doc[key], enum_cls)
    _check_score(out, f"{path}.capability", doc["capability"])
    _check_score(out, f"{path}.default_threat", doc["default_threat"])
    _check_score(out, f"{path}.default_exposure", doc["default_exposure"])
    if "description" in doc:
        _check_str(out, f"{path}.description", doc["description"])
    for key in ("indicators", "countermeasures"):
        if key in doc:
            _check_str_list(out, f"{path}.{key}", doc[key])


def validate_catalog_document(doc: Any, strict: bool = True) -> ValidationReport:
    """Check a parsed catalog document against the schema; findings carry field paths."""
    out = Collector()
    if not isinstance(doc, dict):
        out.error("$", f"catalog document must be a JSON object, got {type(doc).__name__}")
        return out.report()
    if not _check_keys(out, "$", doc, ("version", "tactics", "techniques"), (), strict):
        return out.report()

    _check_str(out, "version", doc["version"])

    known_tactics: set[str] = set()
    if isinstance(doc["tactics"], list):
        for i, tactic in enumerate(doc["tactics"]):
            path = f"tactics[{i}]"
            if not isinstance(tactic, dict):
                out.error(path, "tactic must be an object")
                continue
            if not _check_keys(out, path, tactic, ("id", "name"), ("description",), strict):
                continue
            if _check_str(out, f"{path}.id", tactic["id"], allow_empty=False):
                if tactic["id"] in known_tactics:
                    out.error(f"{path}.id", f"duplicate tactic id '{tactic['id']}'")
                known_tactics.add(tactic["id"])
            _check_str(out, f"{path}.name", tactic["name"])
            if "description" in tactic:
                _check_str(out, f"{path}.description", tactic["description"])
    else:
        out.error("tactics", "must be a list")

    if isinstance(doc["techniques"], list):
        seen_ids: set[str] = set()
        for i, technique in enumerate(doc["techniques"]):
            path = f"techniques[{i}]"
            _validate_technique_doc(out, path, technique, known_tactics, strict)
            if isinstance(technique, dict) and isinstance(technique.get("id"), str):
                if technique["id"] in seen_ids:
                    out.error(f"{path}.id", f"duplicate technique id '{technique['id']}'")
                seen_ids.add(technique["id"])
    else:
        out.error("techniques", "must be a list")
    return out.report()


def technique_from_doc(doc: Mapping[str, Any]) -> Technique:
    """Build a Technique from an already-validated document fragment."""
    return Technique(
        id=doc["id"],
        name=doc["name"],
        tactics=tuple(doc["tactics"]),
        objective=AttackObjective(doc["objective"]),
        mechanism=AttackMechanism(doc["mechanism"]),
        environment=DeploymentEnvironment(doc["environment"]),
        capability=doc["capability"],
        lifecycle=LifecyclePhase(doc["lifecycle"]),
        layer=SystemLayer(doc["layer"]),
        default_threat=doc["default_threat"],
        default_exposure=doc["default_exposure"],
        description=doc.get("description", ""),
        indicators=tuple(doc.get("indicators", ())),
        countermeasures=tuple(doc.get("countermeasures", ())),
    )


def technique_to_doc(technique: Technique) -> dict[str, Any]:
    return {
        "id": technique.id,
        "name": technique.name,
        "description": technique.description,
        "tactics": list(technique.tactics),
        "objective": technique.objective.value,
        "mechanism": technique.mechanism.value,
        "environment": technique.environment.value,
        "capability": technique.capability,
        "lifecycle": technique.lifecycle.value,
        "layer": technique.layer.value,
        "default_threat": technique.default_threat,
        "default_exposure": technique.default_exposure,
        "indicators": list(technique.indicators),
        "countermeasures": list(technique.countermeasures),
    }


def load_catalog(document: str | bytes | Mapping[str, Any], strict: bool = True) -> Catalog:
    """Parse and validate a catalog document; all-or-nothing.

    Raises :class:`ParseError` for malformed JSON and :class:`ValidationError`
    (carrying the full finding list) when the schema is violated.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    else:
        doc = document

    report = validate_catalog_document(doc, strict=strict)
    if not report.ok:
        raise ValidationError(report, context="catalog")

    tactics = {
        t["id"]: TacticDefinition(id=t["id"], name=t["name"], description=t.get("description", ""))
        for t in doc["tactics"]
    }
    techniques = {t["id"]: technique_from_doc(t) for t in doc["techniques"]}
    return Catalog(version=doc["version"], tactic_definitions=tactics, techniques=techniques)


def catalog_to_doc(catalog: Catalog) -> dict[str, Any]:
    return {
        "version": catalog.version,
        "tactics": [
            {"id": t.id, "name": t.name, "description": t.description}
            for t in catalog.tactic_definitions.values()
        ],
        "techniques": [technique_to_doc(t) for t in catalog.techniques.values()],
    }


def serialize_catalog(catalog: Catalog) -> str:
    """Render a catalog back to its JSON document form (round-trips through load_catalog)."""
    return json.dumps(catalog_to_doc(catalog), indent=2) + "\n"


def validate_catalog(catalog: Catalog) -> ValidationReport:
    """Re-check every catalog invariant on an in-memory catalog object.

    A catalog produced by :func:`load_catalog` always yields an empty report;
    hand-assembled catalogs may not.
    """
    out = Collector()
    for i, (key, technique) in enumerate(catalog.techniques.items()):
        path = f"techniques[{i}]"
        if key != technique.id:
            out.error(f"{path}.id", f"keyed as '{key}' but technique id is '{technique.id}'")
        if not technique.tactics:
            out.error(f"{path}.tactics", "technique must reference at least one tactic")
        for j, tactic_id in enumerate(technique.tactics):
            if tactic_id not in catalog.tactic_definitions:
                out.error(f"{path}.tactics[{j}]", f"unknown tactic '{tactic_id}'")
        _check_score(out, f"{path}.capability", technique.capability)
        _check_score(out, f"{path}.default_threat", technique.default_threat)
        _check_score(out, f"{path}.default_exposure", technique.default_exposure)
    return out.report()


def query_techniques(catalog: Catalog, query: TechniqueFilter | None = None) -> list[Technique]:
    """Return all techniques matching every supplied predicate, ordered by id.

    An empty/absent filter returns the whole catalog. Raises ``ValueError``
    when the filter references a tactic id the catalog does not define.
    """
    query = query or TechniqueFilter()
    if query.tactic is not None and query.tactic not in catalog.tactic_definitions:
        raise ValueError(f"unknown tactic '{query.tactic}' in filter")
    return sorted(
        (t for t in catalog.techniques.values() if query.matches(t)),
        key=lambda t: t.id,
    )
