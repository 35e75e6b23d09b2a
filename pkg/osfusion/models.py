# osfusion/models.py
from django.db import models


class ReportRecord(models.Model):
    """
    An archived report envelope, stored when a command runs with ``--archive``.

    Attributes:
        command (str): subcommand that produced the report
        parameters (dict): options the command ran with
        results (json): command-specific payload
        tool_version (str): osfusion version that wrote the report
        timestamp (str): ISO-8601 time the report was produced, kept verbatim
        schema_version (int): layout version of ``results``
        created_at (datetime): Auto-set when the record is archived
    """
    command = models.CharField(max_length=32)
    parameters = models.JSONField(default=dict)
    results = models.JSONField(null=True)
    tool_version = models.CharField(max_length=32)
    timestamp = models.CharField(max_length=64)
    schema_version = models.PositiveIntegerField(default=1)
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.command} @ {self.timestamp}"

    @classmethod
    def from_envelope(cls, envelope):
        """Build an unsaved record holding ``envelope``."""
        return cls(
            command=envelope.command,
            parameters=envelope.parameters,
            results=envelope.results,
            tool_version=envelope.tool_version,
            timestamp=envelope.timestamp,
            schema_version=envelope.schema_version,
        )

    def to_envelope(self):
        from .reports import ReportEnvelope

        return ReportEnvelope(
            command=self.command,
            parameters=self.parameters,
            results=self.results,
            tool_version=self.tool_version,
            timestamp=self.timestamp,
            schema_version=self.schema_version,
        )

    class Meta:
        verbose_name = "Report Record"
        verbose_name_plural = "Report Records"
        db_table = "report_records"
        ordering = ['created_at', 'id']
