import numpy as np
import pytest

ACCEPTANCE: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def report_criterion():
    def _report(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
        print(ACCEPTANCE[-1])

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
