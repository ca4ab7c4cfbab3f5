import pytest
from hypothesis import HealthCheck, settings

from zorich_lab.geometry import MapParams

settings.register_profile("lab", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

# parameters of the large-lambda regime used throughout: lambda > L^5 and nu > sqrt(2L/lambda)
REGIME = (130.0, 0.3)


@pytest.fixture
def small():
    return MapParams(2.0, 1.0)


@pytest.fixture
def regime():
    return MapParams(*REGIME)


@pytest.fixture
def pyramid():
    return MapParams(2.0, 1.0, "pyramid")


def pytest_terminal_summary(terminalreporter):
    import sys

    module = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(module, "SUMMARY", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
