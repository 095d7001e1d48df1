"""
Shared fixtures: shipped case files and small hand-built networks.
"""

import logging
import os

# No log file during tests
os.environ.setdefault("SOCOPF_LOG_FILE", "")

from pathlib import Path

import pytest

from src.config import Config
from src.network.bundled_cases import load_case
from src.network.network_model import Network
from src.utils.logger import ROOT_NAME
from tests.networks import two_bus_network


@pytest.fixture
def cases_dir() -> Path:
    return Config.CASES_DIR


@pytest.fixture
def case9_path(cases_dir) -> Path:
    return cases_dir / "case9.m"


@pytest.fixture
def case14_path(cases_dir) -> Path:
    return cases_dir / "case14.m"


@pytest.fixture(scope="session")
def case9() -> Network:
    return load_case(Config.CASES_DIR / "case9.m")


@pytest.fixture(scope="session")
def case14() -> Network:
    return load_case(Config.CASES_DIR / "case14.m")


@pytest.fixture
def two_bus() -> Network:
    return two_bus_network()


@pytest.fixture
def package_caplog(caplog):
    """caplog that also sees the package logger, which does not propagate to the root logger."""
    package = logging.getLogger(ROOT_NAME)
    package.addHandler(caplog.handler)
    caplog.set_level(logging.DEBUG, logger=ROOT_NAME)
    yield caplog
    package.removeHandler(caplog.handler)
