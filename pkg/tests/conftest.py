import os

import pytest
from hypothesis import HealthCheck, settings

from qwjost import testcoins

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def c1():
    return testcoins.c1()


@pytest.fixture(scope="session")
def c2():
    return testcoins.c2()


@pytest.fixture(scope="session")
def c3():
    return testcoins.c3()


@pytest.fixture(scope="session")
def c4():
    return testcoins.c4()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE, key=lambda s: (int(s.split(".")[0]), s)):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:<4} {'PASS' if ok else 'FAIL'}  {detail}")
