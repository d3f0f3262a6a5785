"""
Pytest configuration and shared fixtures
"""

import json
import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

# Set test environment
os.environ["PTYX_LOG_LEVEL"] = "WARNING"
os.environ["PTYX_LOG_JSON"] = "false"

from core.budget import SearchBudget  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

settings.register_profile(
    "ptyx",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ptyx"))


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def stream_path():
    """Path of a bundled stream fixture by name"""

    def _path(name: str) -> Path:
        return FIXTURES / "streams" / f"{name}.json"

    return _path


@pytest.fixture
def small_budget() -> SearchBudget:
    return SearchBudget(nodes=5000, depth=5)


@pytest.fixture
def corpus():
    """Formula corpus entries: name, formula and optional relation arities"""
    with open(FIXTURES / "corpus.json", "r", encoding="utf-8") as handle:
        return json.load(handle)["formulas"]


@pytest.fixture
def in_repo_root(monkeypatch):
    """Run from the repository root so @fixtures/... paths resolve"""
    monkeypatch.chdir(ROOT)
    return ROOT


@pytest.fixture(autouse=True)
def isolated_test_env():
    """Ensure tests run in isolated environment"""
    original_env = dict(os.environ)

    os.environ.update({"PTYX_LOG_LEVEL": "WARNING", "PTYX_LOG_JSON": "false"})

    yield

    os.environ.clear()
    os.environ.update(original_env)
