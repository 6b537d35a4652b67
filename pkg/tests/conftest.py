import numpy as np
import pytest

from splinedict.dictionary import DictionarySpec, build_dictionary


@pytest.fixture(scope="session")
def d60():
    """Classical basis of V_6, m=4 on [0, 8]."""
    return build_dictionary(DictionarySpec(4, 0, 8, 6, 0))


@pytest.fixture(scope="session")
def d62():
    """Refined dictionary D(6, 2), m=4 on [0, 8]."""
    return build_dictionary(DictionarySpec(4, 0, 8, 6, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
