"""
CLI app configuration: the verify, sweep and asz management commands.
"""

from django.apps import AppConfig


class CliConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'cli'
    verbose_name = 'Command line'
