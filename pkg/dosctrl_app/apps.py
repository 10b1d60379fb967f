from django.apps import AppConfig


class DosctrlAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'dosctrl_app'
    verbose_name = 'DoS-resilient control toolkit'
