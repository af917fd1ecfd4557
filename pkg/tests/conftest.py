import pytest

from fswml.dataset import embedded_fsw_dataset, encode

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def dataset():
    return embedded_fsw_dataset()


@pytest.fixture(scope="session")
def matrix(dataset):
    return encode(dataset, include_tool=False)


@pytest.fixture(scope="session")
def matrix_tool(dataset):
    return encode(dataset, include_tool=True)


@pytest.fixture
def acceptance():
    """Record a criterion's one-line verdict; lines print in the terminal summary."""

    def record(number: int, name: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number} {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
