import math

import numpy as np
import pytest

from entrobounds import scenarios

ETA_I = np.array([[1, 1], [1, 3]], dtype=complex) / 4


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def eta_i():
    return ETA_I.copy()


def qubit_eigs(d):
    """(lambda_-, lambda_+) of a qubit density matrix with determinant d."""
    r = math.sqrt(max(0.0, 1.0 - 4.0 * d))
    return 0.5 * (1 - r), 0.5 * (1 + r)


def example(name, x):
    return scenarios.builtin(name, x)


# criterion number -> one-line verdict, filled by test_acceptance
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
