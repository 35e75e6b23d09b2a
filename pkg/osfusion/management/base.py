# osfusion/management/base.py
"""
Shared plumbing for the osfusion management commands.

Every command validates its options with a DRF serializer, writes a
human-readable summary to stdout and, with ``--out``, a report envelope.
Library errors are mapped to exit codes: 2 for bad input, 3 for numeric
failures and theory-violation sentinels.
"""

import logging
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import BaseCommand, CommandError
from django.db import connection

from osfusion.exceptions import (
    DatasetError, EmptySplitError, InvalidInputError, InvalidKeyError, InvalidRuleError,
    NumericFailureError, TableCoverageError, TrainingFailureError,
)
from osfusion.moments import get_table
from osfusion.reports import make_envelope, write_report

USAGE_ERRORS = (InvalidInputError, InvalidRuleError, InvalidKeyError, DatasetError, EmptySplitError)
NUMERIC_ERRORS = (NumericFailureError, TableCoverageError, TrainingFailureError)

MOMENT_CACHE_NAME = "moments.txt"


class ReportingCommand(BaseCommand):
    """
    Base class: subclasses set ``name`` and ``parameters_serializer`` and
    implement ``add_command_arguments`` and ``execute_command``.
    """
    name = None
    parameters_serializer = None

    def add_arguments(self, parser):
        self.add_command_arguments(parser)
        parser.add_argument('--out', default=None, help="Write a JSON report envelope to this path")
        parser.add_argument('--archive', action='store_true', help="Also store the report in the database")
        parser.add_argument('--quiet', action='store_true', help="Suppress progress logging")

    def add_command_arguments(self, parser):
        pass

    def execute_command(self, params):
        """Return ``(results, violation)``; a non-empty violation exits with status 3."""
        raise NotImplementedError

    def handle(self, *args, **options):
        package_logger = logging.getLogger('osfusion')
        previous_level = package_logger.level
        if options.get('quiet'):
            package_logger.setLevel(logging.WARNING)
        try:
            self._handle(options)
        finally:
            package_logger.setLevel(previous_level)

    def _handle(self, options):
        serializer = self.parameters_serializer(data=self.parameter_data(options))
        if not serializer.is_valid():
            raise CommandError(self.format_errors(serializer.errors), returncode=2)
        params = serializer.validated_data

        try:
            results, violation = self.execute_command(params)
        except USAGE_ERRORS as exc:
            raise CommandError(str(exc), returncode=2) from exc
        except NUMERIC_ERRORS as exc:
            raise CommandError(str(exc), returncode=3) from exc

        envelope = make_envelope(
            self.name,
            serializer.to_representation(params),
            results,
            schema_version=settings.OSFUSION_SCHEMA_VERSION,
        )
        if options.get('out'):
            write_report(envelope, options['out'])
        if options.get('archive'):
            self.archive(envelope)

        if violation:
            raise CommandError(violation, returncode=3)

    def parameter_data(self, options):
        """Pick the serializer's fields out of the parsed options, dropping unset ones."""
        fields = self.parameters_serializer().fields
        return {name: options[name] for name in fields if options.get(name) is not None}

    @staticmethod
    def format_errors(errors):
        parts = []
        for name, messages in errors.items():
            label = "" if name == 'non_field_errors' else f"{name}: "
            parts.append(label + "; ".join(str(m) for m in messages))
        return "invalid arguments: " + " | ".join(parts)

    def archive(self, envelope):
        from osfusion.models import ReportRecord

        if ReportRecord._meta.db_table not in connection.introspection.table_names():
            call_command('migrate', 'osfusion', verbosity=0, interactive=False)
        record = ReportRecord.from_envelope(envelope)
        record.save()
        self.stdout.write(self.style.SUCCESS(f"archived report #{record.pk}"))

    # helpers shared by the commands

    def moment_table(self, n_max, cache=None):
        """Cached moment table covering n_max (at least the configured default size)."""
        cache_path = Path(cache) if cache else Path(settings.OSFUSION_CACHE_DIR) / MOMENT_CACHE_NAME
        size = max(n_max, settings.OSFUSION_MOMENT_TABLE_N_MAX)
        return get_table(size, cache_path=cache_path, workers=settings.OSFUSION_WORKERS)

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))

    def warning(self, message):
        self.stdout.write(self.style.WARNING(message))
