"""
Production settings for Django.

Scenario workers consume the `simulations` queue from Redis; nothing runs eagerly.
"""
from .base import *

DEBUG = False

# Must be set explicitly for workers; crashes at startup if missing
CELERY_BROKER_URL = env("CELERY_BROKER_URL")
CELERY_RESULT_BACKEND = env("CELERY_RESULT_BACKEND", default=CELERY_BROKER_URL)
CELERY_TASK_ALWAYS_EAGER = False

SOLVER_OUTPUT_DIR = env("SOLVER_OUTPUT_DIR")

LOGGING["handlers"]["console"]["formatter"] = "verbose"
