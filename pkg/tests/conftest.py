import re

import pytest
from hypothesis import HealthCheck, settings

from latticeips.models import TwoStageParams, onoff_dual_model, three_chain, two_stage_model

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def lat3():
    return three_chain()


@pytest.fixture(scope="session")
def params():
    return TwoStageParams(lam=2.0, gamma=1.0, delta1=0.5, delta2=0.3, size=6, topology="torus")


@pytest.fixture(scope="session")
def two_stage(params):
    return two_stage_model(params)


@pytest.fixture(scope="session")
def onoff(params):
    return onoff_dual_model(params)


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.failed):
        ACCEPTANCE[key] = (m.group(2), report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        name, outcome, dur = ACCEPTANCE[key]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {key}: {verdict}  {name.replace('_', ' ')} ({dur:.2f}s)")
