import numpy as np
import pytest

from sympearson.ar_process import ARModelSpec
from sympearson.asymptotics import AsymptoticContext
from sympearson.distributions import NormalScale
from sympearson.pearson_test import null_partition

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def ar1_model():
    return ARModelSpec(beta=(0.5,), nu=1.0, theta0=NormalScale(1.0))


@pytest.fixture(scope="session")
def ar1_ctx(ar1_model):
    return AsymptoticContext.build(null_partition(1.0, 5), ar1_model)


@pytest.fixture(scope="session")
def acceptance_log():
    """Record one pass/fail line per acceptance criterion for the summary."""

    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
