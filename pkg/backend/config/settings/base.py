"""
Django settings for the Galerkin solver.
Only the pieces the solver uses: apps, templates, logging, Celery and SOLVER_*.
"""
from pathlib import Path
import environ

# Build paths
BASE_DIR = Path(__file__).resolve().parent.parent.parent.parent
APPS_DIR = BASE_DIR / "backend" / "apps"

# Environment setup
env = environ.Env()
environ.Env.read_env(BASE_DIR / ".env")

DEBUG = env.bool("DEBUG", default=False)

# No sessions, signing or admin: the key only satisfies Django's startup checks.
SECRET_KEY = env("SECRET_KEY", default="galerkin-solver-local-key")

ALLOWED_HOSTS = env.list("ALLOWED_HOSTS", default=["localhost", "127.0.0.1"])

# ============================================================================
# APPLICATION DEFINITION
# ============================================================================
INSTALLED_APPS = [
    "backend.apps.spectral",
    "backend.apps.simulations",
]

# Templates (SVG plots are rendered from app templates)
TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {"context_processors": []},
    },
]

# The solver keeps no database state
DATABASES = {}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True

# ============================================================================
# CELERY CONFIGURATION
# ============================================================================
REDIS_URL = env("REDIS_URL", default="redis://localhost:6379/1")
CELERY_BROKER_URL = env("CELERY_BROKER_URL", default=REDIS_URL)
CELERY_RESULT_BACKEND = env("CELERY_RESULT_BACKEND", default=REDIS_URL)
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = "UTC"
CELERY_ENABLE_UTC = True
CELERY_TASK_ALWAYS_EAGER = env.bool("CELERY_TASK_ALWAYS_EAGER", default=DEBUG)
CELERY_TASK_EAGER_PROPAGATES = True
CELERY_BROKER_CONNECTION_RETRY_ON_STARTUP = True
CELERY_TASK_DEFAULT_QUEUE = 'default'
CELERY_WORKER_CONCURRENCY = env.int('CELERY_WORKER_CONCURRENCY', default=4)

# ============================================================================
# SOLVER
# ============================================================================
SOLVER_OUTPUT_DIR = env("SOLVER_OUTPUT_DIR", default=str(BASE_DIR / "results"))
SOLVER_GAUSS_POINTS = env.int("SOLVER_GAUSS_POINTS", default=8)
SOLVER_MIN_PANELS = env.int("SOLVER_MIN_PANELS", default=16)
SOLVER_MAX_HALVINGS = env.int("SOLVER_MAX_HALVINGS", default=8)
SOLVER_ENERGY_TOLERANCE = env.float("SOLVER_ENERGY_TOLERANCE", default=1e-9)
SOLVER_AUDIT_SLACK = env.float("SOLVER_AUDIT_SLACK", default=1e-6)
SOLVER_GRONWALL_SLACK = env.float("SOLVER_GRONWALL_SLACK", default=0.05)
SOLVER_PLOT_POINTS = env.int("SOLVER_PLOT_POINTS", default=201)
SOLVER_LOG_LEVEL = env("SOLVER_LOG_LEVEL", default="INFO")

# ============================================================================
# LOGGING
# ============================================================================
LOG_DIR = BASE_DIR / "logs"
LOG_DIR.mkdir(exist_ok=True)

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {process:d} {message}",
            "style": "{",
        },
        "simple": {"format": "{levelname} {message}", "style": "{"},
    },
    "handlers": {
        "console": {
            "level": "INFO",
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
        "file": {
            "level": "WARNING",
            "class": "logging.FileHandler",
            "filename": LOG_DIR / "solver.log",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "django": {
            "handlers": ["console", "file"],
            "level": "INFO",
            "propagate": True,
        },
        "backend": {
            "handlers": ["console", "file"],
            "level": SOLVER_LOG_LEVEL,
            "propagate": False,
        },
        "celery": {
            "handlers": ["console", "file"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
