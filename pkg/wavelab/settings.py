# wavelab/settings.py

import os
from pathlib import Path
from dotenv import load_dotenv
import dj_database_url

load_dotenv()  # reads .env in project root if present

BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "unsafe-dev-secret")
DEBUG = os.getenv("DEBUG", "False") == "True"
ALLOWED_HOSTS = os.getenv("ALLOWED_HOSTS", "127.0.0.1,localhost").split(",")

# Apps
INSTALLED_APPS = [
    "django.contrib.auth",
    "django.contrib.contenttypes",

    # third-party
    "rest_framework",

    # local
    "wavemaps",
]

# Database (sqlite unless DATABASE_URL is set)
DATABASES = {
    "default": dj_database_url.config(
        default=os.getenv("DATABASE_URL", f"sqlite:///{BASE_DIR / 'wavelab.sqlite3'}")
    )
}

# Internationalization
LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

REST_FRAMEWORK = {
    "DEFAULT_RENDERER_CLASSES": ("rest_framework.renderers.JSONRenderer",),
    "COERCE_DECIMAL_TO_STRING": False,
}

# Logging
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "wavemaps": {
            "handlers": ["console"],
            "level": os.getenv("WAVEMAPS_LOG_LEVEL", "INFO"),
            "propagate": False,
        },
    },
}

# Wave map runs
WAVEMAPS = {
    "CACHE_DIR": os.getenv("WAVEMAPS_CACHE_DIR", str(BASE_DIR / ".wavemaps_cache")),
    "OUTPUT_DIR": os.getenv("WAVEMAPS_OUTPUT_DIR", str(BASE_DIR / "runs")),
    "WORKERS": int(os.getenv("WAVEMAPS_WORKERS", "1")),
    "TOLERANCES": {
        "ode_rtol": 1e-10,
        "eigen_residual": 1e-6,
        "dual_identity": 1e-6,
        "fixed_point": 1e-10,
        "picard": 1e-8,
        "constraint": 1e-6,
        "tail": 1e-6,
        "consistency": 1e-5,
    },
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
