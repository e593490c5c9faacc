"""
Kernels app configuration: harmonic functions and the harmonicity oracle.
"""

from django.apps import AppConfig


class KernelsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'kernels'
    verbose_name = 'Kernels'
