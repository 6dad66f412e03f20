import numpy as np
import pytest

from contextgames.scenarios import builtin_scenario

# filled by test_acceptance; one line per criterion
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def catalog():
    names = ["33", "nn:3", "nn:5", "nn:7", "nn:9", "nn:11", "43", "34", "44"]
    return {name: builtin_scenario(name) for name in names}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k.split()[0][2:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
