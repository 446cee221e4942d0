from pathlib import Path

import numpy as np
import pytest

from taxframe.accounts import load_emissions, load_household_accounts, load_sector_accounts
from taxframe.fiscal import load_scenario, prepare_model

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "idn2016-synthetic"


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_accounts():
    return load_sector_accounts(FIXTURE_DIR / "sectors.csv")


@pytest.fixture(scope="session")
def fixture_households(fixture_accounts):
    return load_household_accounts(FIXTURE_DIR / "households.csv", fixture_accounts.sector_ids)


@pytest.fixture(scope="session")
def fixture_scenario(fixture_accounts):
    return load_scenario(FIXTURE_DIR / "scenario.json", fixture_accounts.sector_ids)


@pytest.fixture(scope="session")
def fixture_emissions(fixture_accounts):
    return load_emissions(FIXTURE_DIR / "emissions.csv", fixture_accounts.sector_ids)


@pytest.fixture(scope="session")
def fixture_model(fixture_accounts, fixture_households):
    return prepare_model(fixture_accounts, fixture_households)


@pytest.fixture
def rng():
    return np.random.default_rng(20160101)
