from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paircorr.zero_source import ZeroSet, find_zeros  # noqa: E402


@pytest.fixture(scope="session")
def zs100() -> ZeroSet:
    return find_zeros(100)


@pytest.fixture(scope="session")
def zs1000() -> ZeroSet:
    return find_zeros(1000)


@pytest.fixture(scope="session")
def zs2000() -> ZeroSet:
    return find_zeros(2000)


@pytest.fixture(scope="session")
def one_zero() -> ZeroSet:
    return ZeroSet.from_ordinates([14.134725141734693], t_max=20.0)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion; printed at the end of the run."""
    def record(number: int, passed: bool, detail: str) -> None:
        _ACCEPTANCE[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
