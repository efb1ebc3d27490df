from __future__ import annotations

import numpy as np
import pytest

from hycomp import corpus


@pytest.fixture(scope="session")
def thermo():
    return corpus.thermostat()


@pytest.fixture(scope="session")
def rooms():
    return corpus.two_rooms()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
