"""
Access to SOLVER_* settings with fallbacks, so numerical modules also work
when no Django project is configured.
"""
import os

from django.conf import settings


def solver_setting(name, default):
    if not settings.configured and not os.environ.get('DJANGO_SETTINGS_MODULE'):
        return default
    return getattr(settings, name, default)
