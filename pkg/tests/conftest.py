import numpy as np
import pytest

ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def record():
    """Store one acceptance verdict line, printed in the terminal summary."""

    def _record(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE[number] = (ok, detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
