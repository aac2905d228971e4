from django.apps import AppConfig


class SimulationsConfig(AppConfig):
    name = 'backend.apps.simulations'
    verbose_name = 'Time integration, audits and scenarios'
