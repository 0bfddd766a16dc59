import pytest

from levy_mp.config import config


@pytest.fixture(autouse=True, scope="session")
def _integration_config():
    config.set(threads=4, block_size=1024)
