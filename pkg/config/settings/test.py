from .base import *
from .base import env

SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="test-only-3c9b2e7d4a1f",
)

FREQFED_WORKERS = 1

LOGGING["root"]["level"] = env("FREQFED_LOG", default="warning").upper()
