import math

import numpy as np
import pytest

from rarefaction_lab.thermo import GasConstants, PrimState
from rarefaction_lab.wave import build_wave_spec

ACCEPTANCE_LINES = []


@pytest.fixture
def gas():
    return GasConstants(R=1.0, A=1.0, gamma=1.4, mu=0.01, lam=0.0, kappa=0.01)


@pytest.fixture
def right():
    return PrimState(1.0, 0.0, 0.0, 0.0, 1.0)


@pytest.fixture
def spec(gas, right):
    return build_wave_spec(gas, right, strength=0.3, eps=0.1, q=2.0)


@pytest.fixture
def centered_spec(gas):
    right = PrimState(1.0, 0.15 - math.sqrt(1.4), 0.0, 0.0, 1.0)
    return build_wave_spec(gas, right, strength=0.3, eps=0.1, q=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    def report(number, passed, detail):
        ACCEPTANCE_LINES.append((number, bool(passed), detail))
        print(f"ACCEPTANCE {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
