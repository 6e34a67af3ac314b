import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from acalc import preset

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

COMMUTATIVE_PRESETS = [
    "real",
    "complex",
    "hyperbolic",
    "dual",
    "direct_product:3",
    "H_N:3",
    "C_N:3",
    "Gamma_N:3",
]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def C():
    return preset("complex")


@pytest.fixture(scope="session")
def H():
    return preset("hyperbolic")


@pytest.fixture(scope="session")
def D():
    return preset("dual")


# one PASS/FAIL line per acceptance criterion, shown at the end of every run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
