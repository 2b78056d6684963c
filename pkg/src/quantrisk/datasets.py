"""Bundled demonstration dataset: a photon-number-splitting kill chain on a fibre QKD link."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .catalog import Catalog, load_catalog
from .chain import Portfolio, load_portfolio


def _read(name: str) -> str:
    return resources.files("quantrisk.data").joinpath(name).read_text(encoding="utf-8")


def pns_catalog_text() -> str:
    return _read("pns_catalog.json")


def pns_portfolio_text() -> str:
    return _read("pns_portfolio.json")


def pns_catalog() -> Catalog:
    """The nine-technique catalog behind the bundled PNS scenario."""
    return load_catalog(pns_catalog_text())


def pns_portfolio() -> Portfolio:
    """A one-chain portfolio holding the nine-step PNS kill chain (impact 5, threshold 8)."""
    return load_portfolio(pns_portfolio_text())


def pns_catalog_path() -> Path:
    """Filesystem path of the bundled catalog (assumes a regular on-disk install)."""
    return Path(str(resources.files("quantrisk.data").joinpath("pns_catalog.json")))


def pns_portfolio_path() -> Path:
    return Path(str(resources.files("quantrisk.data").joinpath("pns_portfolio.json")))
