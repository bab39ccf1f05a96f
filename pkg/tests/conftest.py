import numpy as np
import pytest

from markovpin import build_kernel, two_state_chain

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def kernel():
    """The default law: alpha = 0.5, constant L, T_K = 10^5."""
    return build_kernel(0.5)


@pytest.fixture(scope="session")
def small_kernel():
    return build_kernel(0.5, T_K=50)


@pytest.fixture
def chain03():
    return two_state_chain(0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance():
    """Record a criterion outcome; the summary is printed at the end of the run."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
