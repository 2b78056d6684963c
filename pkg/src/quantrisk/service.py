"""HTTP+JSON API over the assessment engine, for the web UI and other clients.

One in-memory session per server: a catalog, a portfolio, and a revision
counter bumped by exactly 1 per accepted mutation. State lives in a single
immutable snapshot swapped atomically, so readers always see a consistent
(catalog, portfolio, revision) triple; mutations are serialized by a lock and
honour optimistic concurrency via the ``If-Match`` header. What-if requests
are read-only speculation and never touch the snapshot.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .assessment import (
    OverrideDomainError,
    UnknownReferenceError,
    assess_portfolio,
    parse_overrides,
    what_if,
)
from .catalog import Catalog, catalog_to_doc, load_catalog
from .chain import (
    ContextProfile,
    Portfolio,
    chain_from_doc,
    chain_to_doc,
    load_portfolio,
    portfolio_to_doc,
    validate_chain,
    validate_chain_doc,
)
from .findings import Collector, ParseError, ValidationError
from .scoring import (
    IMPACT_LABELS,
    LIKELIHOOD_LABELS,
    AggregationMethod,
    AssessmentConfig,
    default_risk_matrix,
)


@dataclass(frozen=True)
class Snapshot:
    """One consistent view of the session; replaced wholesale on every mutation."""

    catalog: Catalog
    portfolio: Portfolio
    revision: int


def _empty_snapshot() -> Snapshot:
    return Snapshot(
        catalog=Catalog(version="", tactic_definitions={}, techniques={}),
        portfolio=Portfolio(context=ContextProfile(), catalog_version="", chains={}),
        revision=0,
    )


class StaleRevisionError(Exception):
    """If-Match revision does not match the current snapshot."""


@dataclass
class SessionState:
    snapshot: Snapshot = field(default_factory=_empty_snapshot)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def mutate(self, if_match: int | None,
               update: Callable[[Snapshot], Snapshot]) -> Snapshot:
        """Apply ``update`` under the writer lock, bumping the revision by 1."""
        with self._lock:
            current = self.snapshot
            if if_match is not None and if_match != current.revision:
                raise StaleRevisionError(
                    f"If-Match revision {if_match} is stale (current {current.revision})")
            changed = update(current)
            changed = Snapshot(changed.catalog, changed.portfolio, current.revision + 1)
            self.snapshot = changed
            return changed


def _error(status: int, code: str, message: str, findings: list | None = None) -> JSONResponse:
    body: dict[str, Any] = {"code": code, "message": message}
    if findings is not None:
        body["findings"] = findings
    return JSONResponse(status_code=status, content=body)


def _if_match(request: Request) -> int | None:
    raw = request.headers.get("if-match")
    if raw is None:
        return None
    raw = raw.strip().strip('"')
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"If-Match must carry a revision integer, got {raw!r}") from None


async def _body(request: Request) -> Any:
    try:
        return json.loads(await request.body() or b"null")
    except json.JSONDecodeError as exc:
        raise ParseError(f"request body is not valid JSON: {exc}") from exc


def _config_from_doc(doc: Any) -> AssessmentConfig:
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    unknown = set(doc) - {"method", "global_multiplier", "threshold", "boundary_epsilon"}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    method = doc.get("method", AggregationMethod.GEOMETRIC_MEAN.value)
    try:
        method = AggregationMethod(method)
    except ValueError:
        allowed = ", ".join(m.value for m in AggregationMethod)
        raise ValueError(f"method must be one of {{{allowed}}}, got {method!r}") from None
    return AssessmentConfig(
        method=method,
        global_multiplier=doc.get("global_multiplier", 1.0),
        boundary_epsilon=doc.get("boundary_epsilon", 1e-9),
        acceptance_threshold=doc.get("threshold"),
    )


def create_app(catalog: Catalog | None = None, portfolio: Portfolio | None = None,
               static_dir: str | Path | None = None) -> FastAPI:
    """Build the API app, optionally seeded and optionally serving UI assets at /."""
    state = SessionState()
    if catalog is not None or portfolio is not None:
        seeded = _empty_snapshot()
        state.snapshot = Snapshot(
            catalog=catalog if catalog is not None else seeded.catalog,
            portfolio=portfolio if portfolio is not None else seeded.portfolio,
            revision=0,
        )

    app = FastAPI(title="quantrisk service", version="0.1.0")
    app.state.session = state
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(ParseError)
    async def _on_parse_error(_, exc: ParseError):
        return _error(400, "parse_error", str(exc))

    @app.exception_handler(ValidationError)
    async def _on_validation_error(_, exc: ValidationError):
        return _error(400, "validation_error", str(exc), findings=exc.report.to_doc())

    @app.exception_handler(StaleRevisionError)
    async def _on_stale(_, exc: StaleRevisionError):
        return _error(409, "revision_conflict", str(exc))

    @app.exception_handler(OverrideDomainError)
    async def _on_override_domain(_, exc: OverrideDomainError):
        return _error(400, "domain_error", str(exc))

    @app.exception_handler(UnknownReferenceError)
    async def _on_unknown_reference(_, exc: UnknownReferenceError):
        return _error(404, "unknown_reference", str(exc))

    @app.exception_handler(ValueError)
    async def _on_value_error(_, exc: ValueError):
        return _error(400, "domain_error", str(exc))

    # ---- catalog ----------------------------------------------------------

    @app.api_route("/api/catalog", methods=["GET", "HEAD"])
    async def get_catalog():
        s = state.snapshot
        return JSONResponse({"revision": s.revision, "catalog": catalog_to_doc(s.catalog)},
                            headers={"ETag": f'"{s.revision}"'})

    @app.put("/api/catalog")
    async def put_catalog(request: Request):
        doc = await _body(request)
        lenient = request.query_params.get("lenient") in ("1", "true", "yes")
        catalog = load_catalog(doc, strict=not lenient)
        changed = state.mutate(_if_match(request),
                               lambda s: Snapshot(catalog, s.portfolio, s.revision))
        return {"revision": changed.revision}

    # ---- chains -----------------------------------------------------------

    @app.get("/api/chains")
    async def list_chains():
        s = state.snapshot
        chains = [chain_to_doc(s.portfolio.chains[cid]) for cid in sorted(s.portfolio.chains)]
        return JSONResponse({"revision": s.revision, "chains": chains,
                             "context": portfolio_to_doc(s.portfolio)["context"]},
                            headers={"ETag": f'"{s.revision}"'})

    def _checked_chain(doc: Any, catalog: Catalog):
        report = validate_chain_doc(doc, path="$")
        if not report.ok:
            raise ValidationError(report, context="chain")
        chain = chain_from_doc(doc)
        bind = validate_chain(chain, catalog)
        if not bind.ok:
            raise ValidationError(bind, context="chain")
        return chain

    @app.post("/api/chains", status_code=201)
    async def create_chain(request: Request):
        doc = await _body(request)
        if_match = _if_match(request)

        def update(s: Snapshot) -> Snapshot:
            chain = _checked_chain(doc, s.catalog)
            if chain.id in s.portfolio.chains:
                out = Collector()
                out.error("$.id", f"chain id '{chain.id}' already exists")
                raise ValidationError(out.report(), context="chain")
            chains = dict(s.portfolio.chains)
            chains[chain.id] = chain
            portfolio = Portfolio(s.portfolio.context, s.portfolio.catalog_version, chains)
            return Snapshot(s.catalog, portfolio, s.revision)

        changed = state.mutate(if_match, update)
        return {"id": doc["id"], "revision": changed.revision}

    @app.get("/api/chains/{chain_id}")
    async def get_chain(chain_id: str):
        s = state.snapshot
        chain = s.portfolio.chains.get(chain_id)
        if chain is None:
            return _error(404, "not_found", f"unknown chain '{chain_id}'")
        return {"revision": s.revision, "chain": chain_to_doc(chain)}

    @app.put("/api/chains/{chain_id}")
    async def update_chain(chain_id: str, request: Request):
        doc = await _body(request)
        if isinstance(doc, dict) and doc.get("id") not in (None, chain_id):
            return _error(400, "domain_error",
                          f"body id '{doc.get('id')}' does not match path id '{chain_id}'")
        if isinstance(doc, dict):
            doc = {**doc, "id": chain_id}
        if_match = _if_match(request)

        def update(s: Snapshot) -> Snapshot:
            if chain_id not in s.portfolio.chains:
                raise UnknownReferenceError(f"unknown chain '{chain_id}'")
            chain = _checked_chain(doc, s.catalog)
            chains = dict(s.portfolio.chains)
            chains[chain_id] = chain
            portfolio = Portfolio(s.portfolio.context, s.portfolio.catalog_version, chains)
            return Snapshot(s.catalog, portfolio, s.revision)

        changed = state.mutate(if_match, update)
        return {"id": chain_id, "revision": changed.revision}

    @app.delete("/api/chains/{chain_id}")
    async def delete_chain(chain_id: str, request: Request):
        if_match = _if_match(request)

        def update(s: Snapshot) -> Snapshot:
            if chain_id not in s.portfolio.chains:
                raise UnknownReferenceError(f"unknown chain '{chain_id}'")
            chains = dict(s.portfolio.chains)
            del chains[chain_id]
            portfolio = Portfolio(s.portfolio.context, s.portfolio.catalog_version, chains)
            return Snapshot(s.catalog, portfolio, s.revision)

        changed = state.mutate(if_match, update)
        return {"revision": changed.revision}

    # ---- assessment -------------------------------------------------------

    @app.post("/api/assess")
    async def post_assess(request: Request):
        doc = await _body(request)
        try:
            config = _config_from_doc(doc)
        except ValueError as exc:
            return _error(400, "bad_config", str(exc))
        s = state.snapshot
        if not s.portfolio.chains:
            return _error(422, "empty_portfolio", "portfolio contains no chains")
        try:
            result = assess_portfolio(s.portfolio, s.catalog, config)
        except ValidationError as exc:
            return _error(422, "validation_error", str(exc), findings=exc.report.to_doc())
        return {"revision": s.revision, "result": result.to_doc()}

    @app.post("/api/whatif")
    async def post_whatif(request: Request):
        doc = await _body(request)
        if not isinstance(doc, dict):
            return _error(400, "bad_config", "body must be a JSON object")
        unknown = set(doc) - {"config", "overrides"}
        if unknown:
            return _error(400, "bad_config", f"unknown keys: {sorted(unknown)}")
        try:
            config = _config_from_doc(doc.get("config"))
        except ValueError as exc:
            return _error(400, "bad_config", str(exc))
        overrides = parse_overrides(doc.get("overrides") or {})
        s = state.snapshot
        if not s.portfolio.chains:
            return _error(422, "empty_portfolio", "portfolio contains no chains")
        try:
            diff = what_if(s.portfolio, s.catalog, config, overrides)
        except ValidationError as exc:
            return _error(422, "validation_error", str(exc), findings=exc.report.to_doc())
        return {"revision": s.revision, "diff": diff.to_doc()}

    @app.get("/api/matrix")
    async def get_matrix():
        return {
            "likelihood_labels": [LIKELIHOOD_LABELS[i] for i in range(1, 6)],
            "impact_labels": [IMPACT_LABELS[i] for i in range(1, 6)],
            "cells": default_risk_matrix().to_doc(),
        }

    # ---- persistence ------------------------------------------------------

    @app.post("/api/save")
    async def post_save(request: Request):
        doc = await _body(request)
        if not isinstance(doc, dict) or not isinstance(doc.get("path"), str):
            return _error(400, "bad_request", "body must be {\"path\": \"...\"}")
        s = state.snapshot
        payload = {"catalog": catalog_to_doc(s.catalog), "portfolio": portfolio_to_doc(s.portfolio)}
        try:
            Path(doc["path"]).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            return _error(400, "io_error", str(exc))
        return {"path": doc["path"], "revision": s.revision}

    @app.post("/api/load")
    async def post_load(request: Request):
        doc = await _body(request)
        if not isinstance(doc, dict) or not isinstance(doc.get("path"), str):
            return _error(400, "bad_request", "body must be {\"path\": \"...\"}")
        try:
            text = Path(doc["path"]).read_text(encoding="utf-8")
        except OSError as exc:
            return _error(400, "io_error", str(exc))
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"snapshot file is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or "catalog" not in payload or "portfolio" not in payload:
            return _error(400, "parse_error", "snapshot must hold {catalog, portfolio}")
        catalog = load_catalog(payload["catalog"])
        portfolio = load_portfolio(payload["portfolio"])
        changed = state.mutate(_if_match(request),
                               lambda s: Snapshot(catalog, portfolio, s.revision))
        return {"revision": changed.revision}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
