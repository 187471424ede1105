from django.apps import AppConfig


class MetaOpacityConfig(AppConfig):
    name = "meta_opacity"
    verbose_name = "META opacity"
