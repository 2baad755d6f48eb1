from pathlib import Path

import pytest

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = CORPUS / "golden"

# filled by test_acceptance via record_criterion; printed after the run
CRITERIA: list[tuple[int, str, bool]] = []


@pytest.fixture
def corpus() -> Path:
    return CORPUS


@pytest.fixture
def golden() -> Path:
    return GOLDEN


def record_criterion(num: int, label: str, passed: bool) -> None:
    CRITERIA.append((num, label, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok in sorted(CRITERIA):
        terminalreporter.write_line(
            f"criterion {num} ({label}): {'PASS' if ok else 'FAIL'}")
