"""
Django settings for the meta_opacity test project.

Only the settings the ``meta_opacity`` app and its tests read are defined;
there is no database, URL configuration or middleware.
"""

import os

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = "fbkujk%qi0!g$xcz#jah-@#(m%yen^z0dpdatz7hw*=k+&ezgj"

DEBUG = True

ALLOWED_HOSTS = []

META_OPACITY_MAX_STATES = int(os.getenv("META_OPACITY_MAX_STATES", "20000"))
META_OPACITY_MAX_SEMILINEAR = 2000
META_OPACITY_ORACLE_GRID = "1/2"
META_OPACITY_ORACLE_STEPS = 6
META_OPACITY_ORACLE_HORIZON = "3"

INSTALLED_APPS = [
    "meta_opacity",
    "test_app",
]

DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = True

USE_TZ = True
