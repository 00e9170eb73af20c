from django.apps import AppConfig


class FrequencyConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "app.frequency"
