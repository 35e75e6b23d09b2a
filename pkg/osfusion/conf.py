# osfusion/conf.py
from pathlib import Path

from appconf import AppConf
from django.conf import settings  # noqa: F401


class OSFusionConf(AppConf):
    """
    Defaults for the ``OSFUSION_*`` settings.

    Any of these can be overridden in ``backend/settings.py`` (which reads
    them from the environment).
    """
    CACHE_DIR = Path.home() / ".cache" / "osfusion"
    MOMENT_TABLE_N_MAX = 10
    WORKERS = 1
    MC_SAMPLES = 1_000_000
    SIM_BLOCK_SIZE = 65_536
    SCHEMA_VERSION = 1

    class Meta:
        prefix = 'osfusion'
