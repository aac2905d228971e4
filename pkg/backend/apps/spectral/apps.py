from django.apps import AppConfig


class SpectralConfig(AppConfig):
    name = 'backend.apps.spectral'
    verbose_name = 'Spectral eigenbasis and Galerkin operators'
