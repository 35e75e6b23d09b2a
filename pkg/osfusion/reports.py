# osfusion/reports.py
"""
Report envelopes written by the management commands.

An envelope wraps one command's results with the parameters that produced
them. Files are UTF-8 JSON with keys sorted at every level, so repeated seeded
runs give byte-identical ``results``.
"""

import io
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from django.utils import timezone
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from . import __version__
from .exceptions import InvalidInputError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ReportEnvelope:
    """
    Attributes:
        command: subcommand that produced the report
        parameters: every option the command ran with
        results: command-specific payload
        tool_version: osfusion version string
        timestamp: ISO-8601 creation time
        schema_version: version of the ``results`` layout
    """
    command: str
    parameters: dict
    results: object
    tool_version: str = __version__
    timestamp: str = field(default_factory=lambda: timezone.now().isoformat())
    schema_version: int = SCHEMA_VERSION

    def as_dict(self):
        return asdict(self)


def jsonable(value):
    """
    Convert numpy scalars/arrays, tuples and paths into plain JSON values.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if isinstance(value, dict):
        return {str(key): jsonable(value[key]) for key in sorted(value, key=str)}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
    if value is None or isinstance(value, str):
        return value
    return str(value)


def make_envelope(command, parameters, results, schema_version=SCHEMA_VERSION):
    return ReportEnvelope(
        command=command,
        parameters=jsonable(parameters),
        results=jsonable(results),
        schema_version=schema_version,
    )


def render_envelope(envelope):
    """Serialize an envelope to JSON bytes (sorted keys, 2-space indent)."""
    from .serializers import ReportEnvelopeSerializer

    data = jsonable(ReportEnvelopeSerializer(envelope).data)
    return JSONRenderer().render(data, renderer_context={'indent': 2}) + b"\n"


def write_report(envelope, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(render_envelope(envelope))
    logger.info("wrote %s report to %s", envelope.command, path)
    return path


def parse_envelope(content):
    """
    Parse and validate JSON bytes into a ReportEnvelope.

    Raises:
        InvalidInputError: if the content is not a valid envelope
    """
    from rest_framework.exceptions import ParseError

    from .serializers import ReportEnvelopeSerializer

    try:
        data = JSONParser().parse(io.BytesIO(content))
    except ParseError as exc:
        raise InvalidInputError(f"report is not valid JSON: {exc}") from exc

    serializer = ReportEnvelopeSerializer(data=data)
    if not serializer.is_valid():
        raise InvalidInputError(f"invalid report envelope: {serializer.errors}")
    return serializer.save()


def read_report(path):
    return parse_envelope(Path(path).read_bytes())
