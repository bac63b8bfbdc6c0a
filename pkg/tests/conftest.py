import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    """Record ``(criterion, passed, detail)`` for the acceptance summary."""

    def record(criterion: int, passed: bool, detail: str) -> bool:
        _VERDICTS[criterion] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_VERDICTS):
        passed, detail = _VERDICTS[criterion]
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
