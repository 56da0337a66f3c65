import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# criterion id -> summary line, filled by test_acceptance.py
ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: (int(k.rstrip("ab")), k)):
            terminalreporter.write_line(ACCEPTANCE[key])
