"""Shared fixtures. Expensive corpora are session-scoped so the generator
runs once per test session, not once per test."""

from __future__ import annotations

import datetime as dt

import pytest

from firestorm import (
    SynthConfig,
    generate,
    generate_suite,
    load_demo_lexicon,
)

UTC = dt.timezone.utc


def utc(*args) -> dt.datetime:
    return dt.datetime(*args, tzinfo=UTC)


@pytest.fixture(scope="session")
def lexicon():
    return load_demo_lexicon()


@pytest.fixture(scope="session")
def event42():
    """One synthetic firestorm, seed 42. Returns (dataset, truth)."""
    return generate(SynthConfig(seed=42))


@pytest.fixture(scope="session")
def null_event():
    """Background-only stream: magnitude 1 disables the burst."""
    cfg = SynthConfig(seed=7)
    cfg = _with_magnitude(cfg, 1.0)
    return generate(cfg)


def _with_magnitude(cfg: SynthConfig, magnitude: float) -> SynthConfig:
    import dataclasses

    shape = dataclasses.replace(cfg.firestorm, magnitude=magnitude)
    return dataclasses.replace(cfg, firestorm=shape)


@pytest.fixture(scope="session")
def small_suite():
    """Four events, enough to exercise multi-event evaluation paths."""
    return generate_suite(4, seed=11)


def pytest_terminal_summary(terminalreporter):
    from _report import LINES

    if LINES:
        terminalreporter.section("acceptance recap")
        for line in LINES:
            terminalreporter.write_line(line)
