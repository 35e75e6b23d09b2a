from django.apps import AppConfig


class OsfusionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'osfusion'
    verbose_name = 'Order-statistics combiners'

    def ready(self):
        # registers the OSFUSION_* defaults
        from . import conf  # noqa: F401
