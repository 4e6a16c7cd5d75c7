import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[str, tuple[str, str]] = {}


@pytest.fixture
def acceptance():
    def record(key: str, passed: bool | None, detail: str = ""):
        ACCEPTANCE[key] = ("PASS" if passed else "NOT RUN" if passed is None else "FAIL", detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: [int(p) if p.isdigit() else p for p in k.replace("-", ".").split(".")]):
        verdict, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{verdict:<8} criterion {key}" + (f": {detail}" if detail else ""))


@pytest.fixture
def data_dir():
    from pathlib import Path

    return Path(__file__).parent / "data"
