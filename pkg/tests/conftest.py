from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from qforge import environments

settings.register_profile(
    "qforge",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("qforge")


@pytest.fixture(autouse=True)
def clean_env_stack():
    """A failing test must not leave an environment open for the next one."""
    yield
    environments._STACK.clear()


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in test_acceptance.RESULTS:
        terminalreporter.write_line(line)
