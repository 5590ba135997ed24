import os
from pathlib import Path

import numpy as np
import pytest

from mrules import catalog_dir, load_problem

FIXTURES = Path(__file__).parent / "fixtures"
CATALOG = Path(str(catalog_dir()))

# fixed seed for every randomised audit unless a test overrides it
os.environ.setdefault("MRULES_SEED", "0")


def catalog_files():
    return sorted(CATALOG.glob("*.toml"))


@pytest.fixture
def catalog():
    return CATALOG


@pytest.fixture
def fixtures():
    return FIXTURES


def load(name):
    """Load a catalog entry by stem, or a fixture by file name."""
    path = CATALOG / f"{name}.toml"
    if not path.exists():
        path = FIXTURES / name
    return load_problem(path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance.summary_lines():
        terminalreporter.write_line(line)
