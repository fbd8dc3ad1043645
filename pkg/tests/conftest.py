"""Shared fixtures: cached training databases, canonical jaw runs, and
the per-criterion verdict lines printed after the acceptance tests."""

from __future__ import annotations

import numpy as np
import pytest

from archmark.pipeline import analyze
from archmark.synth import build_jaw_spec, generate_synthetic_jaw
from archmark.training import build_reference_database

JAW_KINDS = ("adult_upper", "adult_lower", "deciduous_upper",
             "deciduous_lower")

# Seed well outside the training cohort (0..11), so every end-to-end test
# runs on a jaw the database has never seen.
UNSEEN_SEED = 404

_DATABASES: dict[str, object] = {}
_CLEAN_RUNS: dict[str, object] = {}

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def database_for():
    """Factory returning the (cached) synthetic-cohort database."""
    def get(jaw_kind: str):
        if jaw_kind not in _DATABASES:
            _DATABASES[jaw_kind] = build_reference_database(jaw_kind)
        return _DATABASES[jaw_kind]
    return get


@pytest.fixture(scope="session")
def clean_run_for(database_for):
    """Factory for a cached full pipeline run on an unseen clean jaw."""
    def get(jaw_kind: str):
        if jaw_kind not in _CLEAN_RUNS:
            spec = build_jaw_spec(jaw_kind, seed=UNSEEN_SEED)
            soup, gt = generate_synthetic_jaw(spec)
            result = analyze(soup, database_for(jaw_kind))
            _CLEAN_RUNS[jaw_kind] = (soup, gt, result)
        return _CLEAN_RUNS[jaw_kind]
    return get


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
