import numpy as np
import pytest
from hypothesis import settings

from rydcav.model import ModelParams, validate

settings.register_profile("rydcav", max_examples=40, deadline=None)
settings.load_profile("rydcav")


@pytest.fixture
def params():
    return validate(ModelParams())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERION_LINES = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        for line in report.capstdout.splitlines():
            if line.startswith(("PASS criterion", "FAIL criterion")):
                _CRITERION_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERION_LINES:
            terminalreporter.write_line(line)
