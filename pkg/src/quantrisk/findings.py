"""Validation findings shared by the catalog, chain, and service layers.

Validation never mutates or repairs its input: checks produce findings,
loaders reject documents that carry any error-severity finding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Severity(str, Enum):
    """Severity of a single validation finding."""

    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    """One validation observation, anchored to a document path like ``techniques[2].default_threat``."""

    severity: Severity
    path: str
    message: str

    def to_doc(self) -> dict:
        return {"severity": self.severity.value, "path": self.path, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validation pass; valid iff there are no error findings."""

    findings: tuple[Finding, ...] = field(default_factory=tuple)

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.WARNING)

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_doc(self) -> list[dict]:
        return [f.to_doc() for f in self.findings]

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.findings + other.findings)


class ParseError(ValueError):
    """Input document is not well-formed (bad JSON, wrong top-level shape)."""


class ValidationError(ValueError):
    """Input document parsed but violates the schema; carries the full report."""

    def __init__(self, report: ValidationReport, context: str = "document"):
        self.report = report
        first = report.errors[0] if report.errors else None
        detail = f"{first.path}: {first.message}" if first else "invalid"
        super().__init__(f"{context} failed validation ({len(report.errors)} error(s)); first: {detail}")


class Collector:
    """Accumulates findings while walking a document."""

    def __init__(self) -> None:
        self._findings: list[Finding] = []

    def error(self, path: str, message: str) -> None:
        self._findings.append(Finding(Severity.ERROR, path, message))

    def warning(self, path: str, message: str) -> None:
        self._findings.append(Finding(Severity.WARNING, path, message))

    def extend(self, report: ValidationReport) -> None:
        self._findings.extend(report.findings)

    def report(self) -> ValidationReport:
        return ValidationReport(tuple(self._findings))
