import os
import sys

from django.core.management import execute_from_command_line


def run_command(argv):
    """
    Run ``qop <argv>`` and return its exit code.
    """
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "baxterq.settings")
    try:
        execute_from_command_line(["qop", "qop", *argv])
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0


def main():
    sys.exit(run_command(sys.argv[1:]))
