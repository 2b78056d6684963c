"""Command-line front door: validate inputs, run assessments, compare aggregators, explore what-ifs.

Exit codes are a total function of outcome class:
0 success, 1 validation or semantic failure, 2 usage or I/O failure,
3 assessment ran fine but at least one chain requires treatment.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import sys
from pathlib import Path

import click

from .assessment import (
    AssessmentResult,
    Comparison,
    OverrideDomainError,
    UnknownReferenceError,
    WhatIfDiff,
    assess_portfolio,
    compare_aggregations,
    overrides_from_json,
    what_if,
)
from .catalog import Catalog, load_catalog, validate_catalog_document
from .chain import Portfolio, load_portfolio, validate_portfolio, validate_portfolio_document
from .findings import ParseError, ValidationError, ValidationReport
from .scoring import (
    IMPACT_LABELS,
    LIKELIHOOD_LABELS,
    AggregationMethod,
    AssessmentConfig,
    round_reported,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_TREATMENT = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _translating_errors(f):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (OSError, ParseError) as exc:
            _fail(EXIT_USAGE, str(exc))
        except ValidationError as exc:
            for line in _finding_lines(exc.report):
                click.echo(line, err=True)
            _fail(EXIT_INVALID, str(exc))
        except (UnknownReferenceError, OverrideDomainError) as exc:
            _fail(EXIT_INVALID, str(exc))
        except ValueError as exc:
            _fail(EXIT_INVALID, str(exc))

    return wrapper


def _finding_lines(report: ValidationReport) -> list[str]:
    return [f"{f.severity.value.upper():7s} {f.path}: {f.message}" for f in report.findings]


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_inputs(catalog_path: str, portfolio_path: str, lenient: bool) -> tuple[Catalog, Portfolio]:
    catalog = load_catalog(_read_text(catalog_path), strict=not lenient)
    portfolio = load_portfolio(_read_text(portfolio_path), strict=not lenient)
    return catalog, portfolio


def _check_multiplier(ctx, param, value):
    if value is not None and not 0 < value <= 2:
        raise click.BadParameter("must be in (0, 2]")
    return value


def _check_threshold(ctx, param, value):
    if value is not None and not 1 <= value <= 25:
        raise click.BadParameter("must be in 1..25")
    return value


def _config_from_flags(method: str, global_multiplier: float, threshold: int | None) -> AssessmentConfig:
    return AssessmentConfig(
        method=AggregationMethod(method),
        global_multiplier=global_multiplier,
        acceptance_threshold=threshold,
    )


_method_option = click.option(
    "--method", type=click.Choice([m.value for m in AggregationMethod]),
    default=AggregationMethod.GEOMETRIC_MEAN.value, show_default=True,
    help="Aggregation strategy collapsing step likelihoods into one scenario likelihood.")
_multiplier_option = click.option(
    "--global-multiplier", "-M", type=float, default=1.0, show_default=True,
    callback=_check_multiplier, help="Environment-level likelihood multiplier, in (0, 2].")
_threshold_option = click.option(
    "--threshold", type=int, default=None, callback=_check_threshold,
    help="Risk value at or above which treatment is required (default: portfolio context).")
_format_option = click.option(
    "--format", "fmt", type=click.Choice(["table", "json", "csv"]),
    default="table", show_default=True, help="Output format.")
_lenient_option = click.option(
    "--lenient", is_flag=True, help="Ignore unknown document keys instead of rejecting them.")


@click.group()
@click.version_option(package_name="quantrisk")
def main() -> None:
    """Risk assessment for quantum communication kill chains."""


# --------------------------------------------------------------------------
# validate

@main.command()
@click.argument("catalog_path", type=click.Path())
@click.argument("portfolio_path", type=click.Path(), required=False)
@_lenient_option
@_translating_errors
def validate(catalog_path: str, portfolio_path: str | None, lenient: bool) -> None:
    """Validate a catalog file and, optionally, a portfolio file against it."""
    strict = not lenient
    findings = []

    try:
        catalog_doc = json.loads(_read_text(catalog_path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    catalog_report = validate_catalog_document(catalog_doc, strict=strict)
    findings += [f"catalog: {line}" for line in _finding_lines(catalog_report)]

    portfolio_report = ValidationReport()
    if portfolio_path is not None:
        try:
            portfolio_doc = json.loads(_read_text(portfolio_path))
        except json.JSONDecodeError as exc:
            raise ParseError(f"portfolio is not valid JSON: {exc}") from exc
        portfolio_report = validate_portfolio_document(portfolio_doc, strict=strict)
        if catalog_report.ok and portfolio_report.ok:
            catalog = load_catalog(catalog_doc, strict=strict)
            portfolio = load_portfolio(portfolio_doc, strict=strict)
            portfolio_report += validate_portfolio(portfolio, catalog)
        findings += [f"portfolio: {line}" for line in _finding_lines(portfolio_report)]

    for line in findings:
        click.echo(line)
    errors = len(catalog_report.errors) + len(portfolio_report.errors)
    warnings = len(catalog_report.warnings) + len(portfolio_report.warnings)
    click.echo(f"{errors} error(s), {warnings} warning(s)")
    sys.exit(EXIT_OK if errors == 0 else EXIT_INVALID)


# --------------------------------------------------------------------------
# assess

def _assess_table(result: AssessmentResult, portfolio: Portfolio) -> str:
    cfg = result.config
    lines = [
        f"Assessment  method={cfg.method.value}  M={cfg.global_multiplier:.3f}"
        f"  threshold={cfg.acceptance_threshold}",
        f"Bounds      L_min={result.bounds.lower:.3f}  L_max={result.bounds.upper:.3f}",
    ]
    for scenario in result.scenarios:
        chain = portfolio.chains[scenario.chain_id]
        flagged = scenario.chain_id in result.treatment_required
        lines.append("")
        lines.append(f"Chain {scenario.chain_id}: {chain.name}")
        lines.append("  #  phase       technique                     T  E  m      l_i")
        for i, step in enumerate(chain.steps):
            marker = " *" if i == scenario.weakest_step_index else ""
            lines.append(
                f"  {i:<2d} {step.phase.value:<11s} {step.technique_id:<28s}"
                f"  {step.threat}  {step.exposure}  {step.multiplier:<5.3f}"
                f"  {scenario.step_likelihoods[i]:.3f}{marker}")
        likelihood_label = LIKELIHOOD_LABELS[scenario.discrete_likelihood]
        impact_label = IMPACT_LABELS[scenario.impact]
        lines.append(
            f"  L_raw={scenario.raw_likelihood:.3f}  L_adj={scenario.adjusted_likelihood:.3f}"
            f"  L={scenario.discrete_likelihood} ({likelihood_label})"
            f"  I={scenario.impact} ({impact_label})"
            f"  R={scenario.risk_value} ({scenario.risk_band.value})"
            f"{'  TREAT' if flagged else ''}")
        if scenario.success_probability is not None:
            lines.append(f"  P_succ={scenario.success_probability:.3e}")
    lines.append("")
    lines.append(f"Treatment required: {', '.join(result.treatment_required) or 'none'}")
    return "\n".join(lines) + "\n"


def _assess_csv(result: AssessmentResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    writer.writerow([
        "chain_id", "method", "raw_likelihood", "adjusted_likelihood", "likelihood",
        "impact", "risk_value", "risk_band", "treatment_required",
        "weakest_step_index", "success_probability",
    ])
    for s in result.scenarios:
        writer.writerow([
            s.chain_id, result.config.method.value,
            round_reported(s.raw_likelihood), round_reported(s.adjusted_likelihood),
            s.discrete_likelihood, s.impact, s.risk_value, s.risk_band.value,
            "yes" if s.chain_id in result.treatment_required else "no",
            s.weakest_step_index,
            "" if s.success_probability is None else f"{s.success_probability:.3e}",
        ])
    return buffer.getvalue()


@main.command()
@click.argument("catalog_path", type=click.Path())
@click.argument("portfolio_path", type=click.Path())
@_method_option
@_multiplier_option
@_threshold_option
@_format_option
@_lenient_option
@_translating_errors
def assess(catalog_path: str, portfolio_path: str, method: str, global_multiplier: float,
           threshold: int | None, fmt: str, lenient: bool) -> None:
    """Assess every kill chain of a portfolio; exit 3 when treatment is required."""
    catalog, portfolio = _load_inputs(catalog_path, portfolio_path, lenient)
    config = _config_from_flags(method, global_multiplier, threshold)
    result = assess_portfolio(portfolio, catalog, config)

    if fmt == "json":
        click.echo(json.dumps(result.to_doc(), indent=2))
    elif fmt == "csv":
        click.echo(_assess_csv(result), nl=False)
    else:
        click.echo(_assess_table(result, portfolio), nl=False)
    sys.exit(EXIT_TREATMENT if result.treatment_required else EXIT_OK)


# --------------------------------------------------------------------------
# compare

def _compare_table(comparison: Comparison) -> str:
    lines = [
        f"Bounds  L_min={comparison.bounds.lower:.3f}  L_max={comparison.bounds.upper:.3f}",
        "chain                 I  | max: raw     L  R   band    | avg: raw     L  R   band"
        "    | geom: raw    L  R   band",
    ]
    for row in comparison.rows:
        cells = []
        for method in (AggregationMethod.MAXIMUM, AggregationMethod.AVERAGE,
                       AggregationMethod.GEOMETRIC_MEAN):
            s = row.outcomes[method]
            cells.append(f"{s.raw_likelihood:8.3f}  {s.discrete_likelihood}  {s.risk_value:<3d} {s.risk_band.value:<7s}")
        lines.append(f"{row.chain_id:<21s} {row.impact}  | {cells[0]} | {cells[1]} | {cells[2]}")
    return "\n".join(lines) + "\n"


def _compare_csv(comparison: Comparison) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    header = ["chain_id", "impact"]
    for method in AggregationMethod:
        header += [f"{method.value}_raw", f"{method.value}_likelihood",
                   f"{method.value}_risk", f"{method.value}_band"]
    writer.writerow(header)
    for row in comparison.rows:
        record: list = [row.chain_id, row.impact]
        for method in AggregationMethod:
            s = row.outcomes[method]
            record += [round_reported(s.raw_likelihood), s.discrete_likelihood,
                       s.risk_value, s.risk_band.value]
        writer.writerow(record)
    return buffer.getvalue()


@main.command()
@click.argument("catalog_path", type=click.Path())
@click.argument("portfolio_path", type=click.Path())
@_multiplier_option
@_threshold_option
@_format_option
@_lenient_option
@_translating_errors
def compare(catalog_path: str, portfolio_path: str, global_multiplier: float,
            threshold: int | None, fmt: str, lenient: bool) -> None:
    """Report every chain under all three aggregation methods side by side."""
    catalog, portfolio = _load_inputs(catalog_path, portfolio_path, lenient)
    config = _config_from_flags(AggregationMethod.GEOMETRIC_MEAN.value, global_multiplier, threshold)
    comparison = compare_aggregations(portfolio, catalog, config)

    if fmt == "json":
        click.echo(json.dumps(comparison.to_doc(), indent=2))
    elif fmt == "csv":
        click.echo(_compare_csv(comparison), nl=False)
    else:
        click.echo(_compare_table(comparison), nl=False)


# --------------------------------------------------------------------------
# whatif

def _whatif_table(diff: WhatIfDiff) -> str:
    b, m = diff.baseline.bounds, diff.modified.bounds
    lines = [
        f"What-if  method={diff.modified.config.method.value}"
        f"  M={diff.modified.config.global_multiplier:.3f}",
        f"Bounds   [{b.lower:.3f}, {b.upper:.3f}] -> [{m.lower:.3f}, {m.upper:.3f}]"
        f"{'  (bounds changed: every chain re-discretized)' if diff.bounds_changed else ''}",
        "chain                 L            R                     band",
    ]
    for d in diff.deltas:
        lines.append(
            f"{d.chain_id:<21s} {d.baseline_likelihood} -> {d.modified_likelihood}"
            f" ({d.delta_likelihood:+d})  {d.baseline_risk:>2d} -> {d.modified_risk:<2d}"
            f" ({d.delta_risk:+d})          {d.baseline_band.value} -> {d.modified_band.value}")
    return "\n".join(lines) + "\n"


def _whatif_csv(diff: WhatIfDiff) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    writer.writerow([
        "chain_id", "baseline_likelihood", "modified_likelihood", "delta_likelihood",
        "baseline_risk", "modified_risk", "delta_risk",
        "baseline_band", "modified_band", "band_changed", "bounds_changed",
    ])
    for d in diff.deltas:
        writer.writerow([
            d.chain_id, d.baseline_likelihood, d.modified_likelihood, d.delta_likelihood,
            d.baseline_risk, d.modified_risk, d.delta_risk,
            d.baseline_band.value, d.modified_band.value,
            "yes" if d.band_changed else "no",
            "yes" if diff.bounds_changed else "no",
        ])
    return buffer.getvalue()


@main.command()
@click.argument("catalog_path", type=click.Path())
@click.argument("portfolio_path", type=click.Path())
@click.argument("overrides_path", type=click.Path())
@_method_option
@_multiplier_option
@_threshold_option
@_format_option
@_lenient_option
@_translating_errors
def whatif(catalog_path: str, portfolio_path: str, overrides_path: str, method: str,
           global_multiplier: float, threshold: int | None, fmt: str, lenient: bool) -> None:
    """Recompute the whole portfolio under an overrides file and report the diff."""
    catalog, portfolio = _load_inputs(catalog_path, portfolio_path, lenient)
    config = _config_from_flags(method, global_multiplier, threshold)
    overrides = overrides_from_json(_read_text(overrides_path))
    diff = what_if(portfolio, catalog, config, overrides)

    if fmt == "json":
        click.echo(json.dumps(diff.to_doc(), indent=2))
    elif fmt == "csv":
        click.echo(_whatif_csv(diff), nl=False)
    else:
        click.echo(_whatif_table(diff), nl=False)


# --------------------------------------------------------------------------
# serve

@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
@click.option("--catalog", "catalog_path", type=click.Path(), default=None,
              help="Seed catalog file (defaults to the bundled PNS catalog).")
@click.option("--portfolio", "portfolio_path", type=click.Path(), default=None,
              help="Seed portfolio file (defaults to the bundled PNS portfolio).")
@click.option("--static-dir", type=click.Path(), default=None,
              help="Directory of built web-UI assets to serve at /.")
@click.option("--empty", is_flag=True, help="Start with an empty catalog and portfolio.")
@_translating_errors
def serve(host: str, port: int, catalog_path: str | None, portfolio_path: str | None,
          static_dir: str | None, empty: bool) -> None:
    """Run the HTTP API (and web UI, when built) for interactive analysis."""
    import uvicorn

    from . import datasets
    from .service import create_app

    if empty:
        catalog = portfolio = None
    else:
        catalog = (load_catalog(_read_text(catalog_path)) if catalog_path
                   else datasets.pns_catalog())
        portfolio = (load_portfolio(_read_text(portfolio_path)) if portfolio_path
                     else datasets.pns_portfolio())
    app = create_app(catalog=catalog, portfolio=portfolio, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
