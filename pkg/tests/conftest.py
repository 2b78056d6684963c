from __future__ import annotations

import pytest
from hypothesis import settings

from quantrisk import datasets

settings.register_profile("quantrisk", deadline=None, derandomize=True)
settings.load_profile("quantrisk")


@pytest.fixture(scope="session")
def pns_catalog():
    return datasets.pns_catalog()


@pytest.fixture(scope="session")
def pns_portfolio():
    return datasets.pns_portfolio()


@pytest.fixture(scope="session")
def pns_paths():
    return datasets.pns_catalog_path(), datasets.pns_portfolio_path()
