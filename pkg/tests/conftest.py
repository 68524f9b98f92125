"""Session fixtures.  The solver batches are expensive and shared between
the unit tests and the acceptance suite, so they run once per session."""

import time

import pytest

from starfd.config import SystemConfig
from starfd.experiments import channel_for
from starfd.protocols import optimize_scheme

import _verdicts
from helpers import convergence_channel


@pytest.fixture(scope="session")
def cfg():
    return SystemConfig()


@pytest.fixture(scope="session")
def ch1(cfg):
    """Seed-1 channel on the fixed geometry."""
    return channel_for(cfg, 1)


@pytest.fixture(scope="session")
def convergence_batch(cfg):
    """es/ms/ts runs on ten seeds with per-seed user draws, plus wall time.

    Returns ({scheme: [SchemeResult for seeds 1..10]}, elapsed_seconds).
    """
    schemes = ("es", "ms", "ts")
    out = {s: [] for s in schemes}
    t0 = time.perf_counter()
    for seed in range(1, 11):
        ch = convergence_channel(cfg, seed)
        for scheme in schemes:
            out[scheme].append(optimize_scheme(ch, cfg, scheme))
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def es_twenty(cfg):
    """Converged ES runs on the fixed geometry, seeds 1..20."""
    return {seed: optimize_scheme(channel_for(cfg, seed), cfg, "es")
            for seed in range(1, 21)}


def pytest_terminal_summary(terminalreporter):
    if _verdicts.lines:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts.summary():
            terminalreporter.write_line(line)
