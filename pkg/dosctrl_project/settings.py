import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / '.env', encoding='utf-8')

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'dosctrl-dev-only-key')

DEBUG = os.environ.get('DOSCTRL_DEBUG', 'false').lower() == 'true'

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'dosctrl_app',
]

# No database is used; management commands only
DATABASES = {}

# Internationalization
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


def _optional_int(value):
    if value is None or value.strip() == '':
        return None
    return int(value)


# Seeds and output locations
DOSCTRL_SEED = _optional_int(os.environ.get('DOSCTRL_SEED'))
DOSCTRL_OUT_DIR = Path(os.environ.get('DOSCTRL_OUT_DIR', BASE_DIR / 'out'))
DOSCTRL_LOG_DIR = Path(os.environ.get('DOSCTRL_LOG_DIR', BASE_DIR / 'logs'))
DOSCTRL_LOG_LEVEL = os.environ.get('DOSCTRL_LOG_LEVEL', 'info').lower()
DOSCTRL_FILE_LOGGING = os.environ.get('DOSCTRL_FILE_LOGGING', 'false').lower() == 'true'
DOSCTRL_WORKERS = int(os.environ.get('DOSCTRL_WORKERS', '1'))

# Numerical defaults
SIM_STEP = float(os.environ.get('DOSCTRL_SIM_STEP', '1e-3'))
DIVERGENCE_LIMIT = float(os.environ.get('DOSCTRL_DIVERGENCE_LIMIT', '1e12'))
HURWITZ_MARGIN = 1e-9
BUDGET_TOLERANCE = 1e-9
# relative slack when matching an instant such as kΔ against an onset h_n
TIME_TOLERANCE = 1e-9
