"""
ASZ app configuration: single-layer potentials and rigidity checks.
"""

from django.apps import AppConfig


class AszConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'asz'
    verbose_name = 'Single-layer potentials'
