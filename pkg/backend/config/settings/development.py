"""
Development settings for Django.
"""
from .base import *

DEBUG = True

# Scenarios run in-process; no broker needed
CELERY_TASK_ALWAYS_EAGER = True

# Solver modules log their per-step decisions at DEBUG
LOGGING["loggers"]["backend"]["level"] = env("SOLVER_LOG_LEVEL", default="DEBUG")
