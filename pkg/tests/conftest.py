import numpy as np
import pytest

from ppmmsel.mechanisms import builtin_mechanisms, get_mechanism, load_mechanism
from ppmmsel.moments import ObservedSummary, PatternMoments


@pytest.fixture(scope="session")
def mechanisms():
    return builtin_mechanisms()


@pytest.fixture
def mech():
    return get_mechanism


@pytest.fixture(scope="session")
def hps():
    return load_mechanism("builtin:hps")


@pytest.fixture
def shrinking_variance():
    """rho=0.2 with nonrespondent proxy variance halved; invalid at phi=1."""
    return ObservedSummary(PatternMoments(1, 1, 1, 1, 0.2), 1.0, 0.5, 0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
