import sys

import numpy as np
import pytest

from ffscale.schedule import RescalingSchedule
from ffscale.twolevel import lz_params


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def gauge_align(reference_states, states):
    """Rephase each column of ``states`` to have real positive overlap with ``reference_states``."""
    ov = np.sum(reference_states.conj() * states, axis=0)
    return states * (np.abs(ov) / ov).conj()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lz():
    """Landau-Zener instance hx = 1, hz = s - 10 over T_ref = 20."""
    return lz_params(1.0, -10.0, 1.0)


@pytest.fixture(scope="session")
def lz_ham(lz):
    return lz.reference(20.0)


@pytest.fixture(scope="session")
def lz_ff5():
    return RescalingSchedule.linear(20.0, 4.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
