import pytest

from coallab import measures as M


@pytest.fixture(scope="session")
def beta15():
    """Beta(0.5, 1.5): alpha = 1.5, the reference measure of the suite."""
    return M.beta(0.5, 1.5)


@pytest.fixture(scope="session")
def kingman():
    return M.kingman()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
