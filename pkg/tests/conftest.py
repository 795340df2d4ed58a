import pytest

from biharmonic_steklov.params import PlateParams

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def disk_params():
    return PlateParams(n=2, tau=1.0, sigma=0.3)
