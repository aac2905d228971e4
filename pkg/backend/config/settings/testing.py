"""
Testing settings.
"""
from .base import *

DEBUG = False

CELERY_TASK_ALWAYS_EAGER = True
CELERY_BROKER_URL = "memory://"
CELERY_RESULT_BACKEND = "cache+memory://"

# Keep test output readable; failures still reach the log file
LOGGING["handlers"]["console"]["level"] = "ERROR"
LOGGING["loggers"]["backend"]["level"] = "WARNING"

SOLVER_OUTPUT_DIR = str(BASE_DIR / "results" / "test")

# Test runner
TEST_RUNNER = "django.test.runner.DiscoverRunner"
