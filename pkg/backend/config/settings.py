"""
Django settings for the PotLab potential-theory laboratory.

PotLab has no web surface and no database: Django provides the settings
layer, logging configuration, app registry and the ``manage.py`` command
runner through which every verification suite and sweep is launched.

Configuration Areas:
    - Core Django application settings (apps only, no middleware or URLs)
    - Numeric defaults table ``POTLAB`` (mesh, schedule, tolerances, floors)
    - REST framework rendering used for JSON reports
    - Logging to console and ``logs/potlab.log``

Examples:
    Environment variable usage:
        # .env file
        POTLAB_LOG_LEVEL=DEBUG
        POTLAB_WORKERS=4
        POTLAB_DETERMINISTIC=True
        POTLAB_OUTPUT_DIR=/tmp/potlab-runs

    Running a suite:
        python manage.py verify --suite ball --n 2..3

Dependencies:
    - python-decouple for typed environment configuration
    - django-environ for the ``.env`` file and ENVIRONMENT switch
    - djangorestframework for serializers and JSON rendering

Notes:
    - Every numeric default lives in ``POTLAB``; library code reads it through
      ``common.defaults.get_default`` so tests can use ``override_settings``.
    - Regression floors in ``POTLAB`` are frozen from oracle runs and are not
      constants derived from theory.
"""

import os
from pathlib import Path
from decouple import config
from environ import Env

env = Env()
env.read_env('.env')

ENVIRONMENT = env.str('ENVIRONMENT', default='development')

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

# =============================================================================
# CORE DJANGO CONFIGURATION
# =============================================================================

# Only used by Django's signing utilities; nothing here is secret.
SECRET_KEY = config('SECRET_KEY', default='potlab-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# =============================================================================
# APPLICATION DEFINITION
# =============================================================================

DJANGO_APPS = [
    'django.contrib.contenttypes',
]

THIRD_PARTY_APPS = [
    'rest_framework',  # Serializers and JSON rendering for reports
]

LOCAL_APPS = [
    'common',      # Errors, report types, serializers, export, parallel map
    'kernels',     # Harmonic functions and the harmonicity oracle
    'geometry',    # Domains, boundary meshes, measures
    'quadrature',  # Surface integration and closed-form self-tests
    'gaps',        # Kuran and Gauss gap estimators, inequality checks
    'beaked',      # The beaked-sphere family and its sweeps
    'asz',         # Single-layer potentials and rigidity checks
    'cli',         # Management commands verify / sweep / asz
]

INSTALLED_APPS = DJANGO_APPS + THIRD_PARTY_APPS + LOCAL_APPS

DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Django REST Framework
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
    'COERCE_DECIMAL_TO_STRING': False,
}

# =============================================================================
# POTLAB NUMERIC DEFAULTS
# =============================================================================

POTLAB = {
    'VERSION': '1.0.0',

    # Meshing
    'MESH_BASE_ARCS_2D': 64,          # ungraded circle: 64 * 2**level arcs
    'MESH_BASE_RINGS_3D': 32,         # polar rings at level 0
    'MESH_MAX_AZIMUTH_3D': 64,        # azimuthal cells per ring at level 0
    'MESH_MIN_AZIMUTH_3D': 4,
    'MESH_GRADING_RATIO': 0.25,       # facet size / distance to grading centre
    'MESH_DEFAULT_POLE_GAP': 1e-3,
    'BEAKED_BASE_CELLS': 8,           # cells per beak piece at level 0
    'PRODUCTION_LEVEL': {2: 4, 3: 2},
    'LEVEL_CAP': {2: 7, 3: 4},

    # Quadrature
    'QUAD_TOL': 1e-4,
    'IDENTITY_TAIL_CUTOFF': 1e12,
    'IDENTITY_TOL': 1e-8,

    # Approach schedules and gap estimation
    'SCHEDULE': {'t0': 1.2, 'q': 0.5, 'count': 8},
    'SWEEP_SCHEDULE': {'t0': 1.2, 'q': 0.5, 'count': 6},
    'GAP_TOL': 1e-3,
    'SPHEROID_FAMILY': {2: (1.05, 1.1, 1.2), 3: (1.1,)},
    'TOUCHING_TOL': 1e-9,             # relative slack when collecting nearest boundary points
    'VERIFY_TOL': 1e-3,
    'PROP32_TOL': 1e-2,
    'ISOPERIMETRIC_TOL': 1e-6,
    'KURAN_DICTIONARY_T': (1.01, 1.05, 1.2),
    'GAMMA_POLE_FACTOR': 2.0,

    # Beaked sphere
    'BEAKED_EPS_MAX': 0.25,
    'SWEEP_EPS': (0.02, 0.2, 6),
    'SWEEP_SAMPLE_RTOL': 5e-3,        # quadrature tol relative to the deficit ratio
    'SWEEP_GAP_RTOL': 5e-2,           # schedule tail step relative to the deficit ratio

    # Single-layer potentials
    'ASZ_RADII_FACTORS': (8.0, 16.0, 32.0, 64.0),
    'ASZ_DIRECTIONS': {2: 16, 3: 64},
    'ASZ_PROFILE_FACTORS': (2.5, 4.0),
    'ASZ_PROFILE_DIRECTIONS': {2: 8, 3: 16},
    'LEMMA51_TOL': 1e-6,

    # Frozen regression floors
    'GAUSS_RATIO_FLOOR': 0.25,
    'RIGIDITY_SPREAD_FLOOR': 1e-3,
    'BALL_SPREAD_TOL': 1e-5,

    # Runtime
    'WORKERS': config('POTLAB_WORKERS', default=1, cast=int),
    'DETERMINISTIC': config('POTLAB_DETERMINISTIC', default=False, cast=bool),
    'OUTPUT_DIR': config('POTLAB_OUTPUT_DIR', default=str(BASE_DIR / 'runs')),
    'SEED': config('POTLAB_SEED', default=20240601, cast=int),
}

# =============================================================================
# LOGGING
# =============================================================================

LOG_DIR = BASE_DIR / 'logs'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': config('POTLAB_LOG_FILE', default=str(LOG_DIR / 'potlab.log')),
            'formatter': 'verbose',
        },
        'console': {
            'level': config('POTLAB_LOG_LEVEL', default='WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console', 'file'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console', 'file'],
            'level': 'WARNING',
            'propagate': False,
        },
        'potlab': {
            'handlers': ['console', 'file'],
            'level': config('POTLAB_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}

# Create logs directory if it doesn't exist
os.makedirs(LOG_DIR, exist_ok=True)
