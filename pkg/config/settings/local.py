from .base import *
from .base import env

DEBUG = True

SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="lk3v!0q7w^2ne5c@m8z#f4r-9t_d1yb6xupg+ahjs=ei&o(",
)

# Client updates are pure, so a laptop can spread them over its cores.
FREQFED_WORKERS = env.int("FREQFED_WORKERS", default=2)
