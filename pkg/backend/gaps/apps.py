"""
Gaps app configuration: Kuran and Gauss gap estimators and inequality checks.
"""

from django.apps import AppConfig


class GapsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gaps'
    verbose_name = 'Gaps'
