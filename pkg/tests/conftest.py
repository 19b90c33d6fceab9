import numpy as np
import pytest

from rqsm.channel import RngStream, sample_channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def channel(seed, trial=0, Nr=4, N=256):
    return sample_channel(RngStream(seed, trial, "verify"), Nr, N)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
