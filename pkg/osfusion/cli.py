# osfusion/cli.py
"""
Programmatic entry point: ``run(["reduce", "--rule", "spread", "--n", "2"])``.

Equivalent to ``python -m osfusion ...`` and ``manage.py ...``; returns the
exit status instead of exiting.
"""

import os
import sys

COMMANDS = ('moments', 'reduce', 'simulate', 'sweep', 'bench', 'make_blobs')

USAGE = """usage: osfusion <command> [options]

commands:
  moments     Gaussian order-statistic moment table
  reduce      reduction factor (and model error) of a combiner
  simulate    boundary-model simulation against the analytic factor
  sweep       simulation over several rules and ensemble sizes
  bench       MLP ensemble benchmark on a labeled CSV
  make_blobs  write a synthetic Gaussian-blob dataset

Run 'osfusion <command> --help' for the options of a command.
"""


def run(argv=None):
    """
    Dispatch one subcommand.

    Returns:
        int: 0 on success, 2 on a usage error, 3 on a numeric failure or a
        theory-violation sentinel
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] in ('-h', '--help'):
        sys.stdout.write(USAGE)
        return 0
    if not argv or argv[0] not in COMMANDS:
        if argv:
            sys.stderr.write(f"osfusion: unknown command {argv[0]!r}\n")
        sys.stderr.write(USAGE)
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'backend.settings')
    from django.core.management import execute_from_command_line

    try:
        execute_from_command_line(['osfusion', *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
