"""
Django settings for the osfusion project.

The project is driven from the command line (``manage.py`` subcommands), so
only the pieces the management commands, the report archive and the test
suite need are configured here.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path

import dj_database_url
import environ
from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Initialize environment variables
env = environ.Env(
    DJANGO_DEBUG=(bool, False),
    OSFUSION_LOG_LEVEL=(str, 'INFO'),
    OSFUSION_WORKERS=(int, 1),
    OSFUSION_MC_SAMPLES=(int, 1_000_000),
    OSFUSION_MOMENT_TABLE_N_MAX=(int, 10),
)
environ.Env.read_env(os.path.join(BASE_DIR, ".env"))


# The CLI never signs anything; a fixed local key keeps Django happy when the
# variable is not set.
SECRET_KEY = env("DJANGO_SECRET_KEY", default="osfusion-local-cli-key")

DEBUG = env("DJANGO_DEBUG")

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'osfusion',
]

# Only serializers, the JSON renderer and the JSON parser are used; there are
# no users to authenticate.
REST_FRAMEWORK = {
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
}


# Database
# https://docs.djangoproject.com/en/5.2/ref/settings/#databases

DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
    )
}


# Internationalization
# https://docs.djangoproject.com/en/5.2/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# osfusion app settings (defaults live in osfusion/conf.py)

def _default_cache_dir():
    xdg = os.environ.get("XDG_CACHE_HOME")
    root = Path(xdg) if xdg else Path.home() / ".cache"
    return root / "osfusion"


OSFUSION_CACHE_DIR = Path(env("OSFUSION_CACHE_DIR", default=str(_default_cache_dir())))
OSFUSION_WORKERS = env("OSFUSION_WORKERS")
OSFUSION_MC_SAMPLES = env("OSFUSION_MC_SAMPLES")
OSFUSION_MOMENT_TABLE_N_MAX = env("OSFUSION_MOMENT_TABLE_N_MAX")


# Logging
# https://docs.djangoproject.com/en/5.2/topics/logging/

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'osfusion': {
            'handlers': ['console'],
            'level': env("OSFUSION_LOG_LEVEL"),
            'propagate': False,
        },
    },
}
