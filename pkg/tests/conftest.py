import logging

import pytest

from hardalloc import AllocConfig


@pytest.fixture(autouse=True)
def _quiet_invalid_free_logs():
    logging.getLogger("hardalloc").setLevel(logging.ERROR)
    yield


@pytest.fixture
def small_cfg():
    """Compact configuration: fast sweeps, quick quarantine turnover."""
    return AllocConfig(slabs_per_class=64, quarantine_capacity=2)
