import pytest
from unittest.mock import MagicMock

from braid_core import BraidWord


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="запускать медленные тесты")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="нужен флаг --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def mock_logger():
    """Фикстура для создания мок-логгера."""
    return MagicMock()


@pytest.fixture
def trefoil():
    return BraidWord(2, (1, 1, 1))


@pytest.fixture
def hopf():
    return BraidWord(2, (1, 1))


@pytest.fixture
def unknot():
    return BraidWord(1)


@pytest.fixture
def figure_eight():
    return BraidWord(3, (1, -2, 1, -2))


@pytest.fixture
def cable_word():
    return BraidWord(4, (2, 1, 3, 2) * 3 + (-1, -1, -1))


@pytest.fixture
def baker_kegel_word():
    return BraidWord(4, (2, 1, 3, 2) * 3 + (-1, 2, 1, 1, 2))
