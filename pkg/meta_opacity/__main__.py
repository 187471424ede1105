"""``meta-opacity`` / ``python -m meta_opacity``: the ``opacity`` management
command outside a Django project."""
import os
import sys

from django.conf import settings
from django.core.management import execute_from_command_line


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if "DJANGO_SETTINGS_MODULE" not in os.environ and not settings.configured:
        settings.configure(INSTALLED_APPS=["meta_opacity"])
    execute_from_command_line(["meta-opacity", "opacity", *argv])


if __name__ == "__main__":
    main()
