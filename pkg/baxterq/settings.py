"""
Standalone settings for running the ``qop`` command outside a host project.

A host project adds "baxterq" and "django_tasks" to INSTALLED_APPS and may set
any of the BAXTERQ_* settings below.
"""

import os


SECRET_KEY = "baxterq-standalone"  # noqa: S105

DEBUG = False

INSTALLED_APPS = [
    "baxterq",
    "django_tasks",
]

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": ":memory:",
    }
}

USE_TZ = True

TASKS = {
    "default": {
        "BACKEND": "django_tasks.backends.immediate.ImmediateBackend",
        "ENQUEUE_ON_COMMIT": False,
    }
}

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "baxterq": {
            "handlers": ["console"],
            "level": os.environ.get("BAXTERQ_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}

# Named bounds, merged over baxterq.config.DEFAULT_TOLERANCES
BAXTERQ_TOLERANCES = {}

BAXTERQ_QUADRATURE = {
    "GRID": (64, 64),
    "MAX_GRID": 512,
    "RTOL": 1e-8,
}

BAXTERQ_SUITES = {}

BAXTERQ_WORKERS = 1
