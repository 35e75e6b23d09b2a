# conftest.py
import pytest

from osfusion.moments import build_table, save_table


@pytest.fixture(scope='session')
def moment_table():
    """Quadrature table for n <= 10, built once per test session."""
    return build_table(10)


@pytest.fixture
def cache_dir(settings, tmp_path, moment_table):
    """Point the commands at a private cache that already holds the n <= 10 table."""
    directory = tmp_path / "cache"
    save_table(moment_table, directory / "moments.txt")
    settings.OSFUSION_CACHE_DIR = directory
    settings.OSFUSION_MOMENT_TABLE_N_MAX = 10
    settings.OSFUSION_WORKERS = 1
    return directory
