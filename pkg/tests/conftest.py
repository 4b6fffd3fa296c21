"""Shared fixtures and random-operator helpers for the test suite."""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import unitary_group

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")


def random_unitary(dim, rng):
    return unitary_group.rvs(dim, random_state=rng)


def degenerate_unitary(dim, rng, n_distinct=2):
    """Random eigenbasis with only ``n_distinct`` distinct eigenphases."""
    w = unitary_group.rvs(dim, random_state=rng)
    phases = rng.uniform(-np.pi, np.pi, size=n_distinct)
    theta = phases[rng.integers(0, n_distinct, size=dim)]
    return (w * np.exp(1j * theta)) @ w.conj().T


def random_state(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
