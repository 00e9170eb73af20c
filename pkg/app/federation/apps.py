from django.apps import AppConfig


class FederationAppConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "app.federation"
    verbose_name = "Federation harness"
