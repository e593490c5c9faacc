"""
Beaked app configuration: the beaked-sphere family, piece measures and sweeps.
"""

from django.apps import AppConfig


class BeakedConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'beaked'
    verbose_name = 'Beaked sphere'
