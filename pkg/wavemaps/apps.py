from django.apps import AppConfig


class WavemapsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'wavemaps'
    verbose_name = 'Near-soliton wave maps'
