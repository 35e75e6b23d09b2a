import json
import math

import numpy as np
import pytest
from django.apps import apps

from osfusion.exceptions import InvalidInputError
from osfusion.models import ReportRecord
from osfusion.reports import (
    ReportEnvelope, jsonable, make_envelope, parse_envelope, read_report, render_envelope,
    write_report,
)


def sample_envelope():
    return make_envelope(
        'simulate',
        {'rule': 'max', 'n': 3, 'seed': np.int64(4)},
        {'ratio': np.float64(0.56), 'z': math.inf, 'rows': (1, 2)},
    )


def test_jsonable_normalizes_values():
    assert jsonable({'b': np.arange(2), 'a': (np.float32(0.5), math.nan)}) == {'a': [0.5, 'nan'], 'b': [0, 1]}


def test_file_round_trip(tmp_path):
    envelope = sample_envelope()
    path = write_report(envelope, tmp_path / "out" / "report.json")
    assert read_report(path) == envelope


def test_reports_need_no_user_accounts(tmp_path):
    assert not apps.is_installed('django.contrib.auth')
    path = write_report(sample_envelope(), tmp_path / "report.json")
    assert read_report(path).command == 'simulate'


def test_rendered_keys_are_sorted():
    data = json.loads(render_envelope(sample_envelope()))
    assert list(data) == sorted(data)
    assert data['results']['z'] == 'inf'


def test_results_render_identically_for_equal_payloads():
    first = render_envelope(sample_envelope())
    second = render_envelope(sample_envelope())
    assert json.loads(first)['results'] == json.loads(second)['results']


@pytest.mark.parametrize('mutate', [
    lambda d: d.pop('command'),
    lambda d: d.update(command='plot'),
    lambda d: d.update(timestamp='yesterday'),
    lambda d: d.update(schema_version=99),
])
def test_invalid_envelopes_are_rejected(mutate):
    data = json.loads(render_envelope(sample_envelope()))
    mutate(data)
    with pytest.raises(InvalidInputError):
        parse_envelope(json.dumps(data).encode())


def test_garbage_is_rejected():
    with pytest.raises(InvalidInputError):
        parse_envelope(b"{not json")


@pytest.mark.django_db
def test_record_round_trip():
    envelope = sample_envelope()
    record = ReportRecord.from_envelope(envelope)
    record.save()
    stored = ReportRecord.objects.get(pk=record.pk)
    assert stored.to_envelope() == envelope
    assert str(stored).startswith('simulate @ ')
    assert isinstance(stored.to_envelope(), ReportEnvelope)
