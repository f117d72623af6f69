from django.apps import AppConfig


class BeamalignConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'beamalign'
    verbose_name = 'Alinhamento de feixe'
