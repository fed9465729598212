import pytest

from helpers import FIXTURES
from unitforge.engine import default_config
from unitforge.unitspace import load_units_dir


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def table_units():
    return load_units_dir(FIXTURES)


def pytest_terminal_summary(terminalreporter):
    from helpers import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[n])
