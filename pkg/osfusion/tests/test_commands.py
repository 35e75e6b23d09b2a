from io import StringIO

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from osfusion.cli import run
from osfusion.models import ReportRecord
from osfusion.reports import read_report


def call(*args):
    out = StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


def test_moments_prints_the_cache_format(cache_dir):
    lines = call('moments', '--n-max', '3').splitlines()
    assert lines[0] == '# mu'
    assert lines.count('# alpha') == 1
    assert sum(1 for line in lines if not line.startswith('#')) == 16


def test_moments_with_monte_carlo_check(cache_dir):
    output = call('moments', '--n-max', '2', '--verify-mc', '20000', '--seed', '3')
    assert '# mc' in output
    assert 'MISMATCH' not in output


def test_reduce_prints_the_factor(cache_dir):
    assert call('reduce', '--rule', 'spread', '--n', '2').strip() == '0.500'


def test_reduce_biased_reports_model_error(cache_dir, tmp_path):
    out = tmp_path / "reduce.json"
    line = call('reduce', '--rule', 'os:2', '--n', '3', '--biased', '--s', '2', '--sigma-b', '0.1',
                '--sigma-beta', '0.1', '--beta-bar', '0.05', '--out', str(out))
    factor, error = line.split()
    assert factor == '0.449'
    envelope = read_report(out)
    assert envelope.results['model_error'] == pytest.approx(0.01148, abs=2e-5)
    assert envelope.parameters['rule'] == 'os:2'
    assert envelope.parameters['sigma_beta'] == 0.1


def test_reduce_rejects_a_rule_that_does_not_fit(cache_dir):
    with pytest.raises(CommandError) as excinfo:
        call('reduce', '--rule', 'trim:2:4', '--n', '3')
    assert excinfo.value.returncode == 2


def test_simulate_writes_a_report(cache_dir, tmp_path):
    out = tmp_path / "sim.json"
    output = call('simulate', '--rule', 'max', '--n', '3', '--trials', '20000', '--seed', '1', '--out', str(out))
    assert 'analytic 0.5595' in output
    results = read_report(out).results
    assert abs(results['z']) < 5


def test_simulate_is_reproducible(cache_dir, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        call('simulate', '--rule', 'med', '--n', '5', '--trials', '20000', '--seed', '9', '--out', str(path))
    assert read_report(paths[0]).results == read_report(paths[1]).results


def test_simulate_with_bias_file(cache_dir, tmp_path):
    biases = tmp_path / "biases.txt"
    biases.write_text("# beta_i beta_j\n0.05 0.0\n0.02 0.01\n0.0 0.0\n")
    out = tmp_path / "sim.json"
    output = call('simulate', '--rule', 'ave', '--n', '3', '--trials', '20000', '--bias-file', str(biases),
                  '--out', str(out))
    assert any(line.startswith('ratio ') for line in output.splitlines())
    results = read_report(out).results
    assert results['beta_rule'] == pytest.approx(0.02)
    assert f"analytic {results['analytic_ratio']:.4f}" in output
    assert abs(results['z']) < 5


def test_simulate_bias_file_must_match_ensemble(cache_dir, tmp_path):
    biases = tmp_path / "biases.txt"
    biases.write_text("0.05 0.0\n")
    with pytest.raises(CommandError) as excinfo:
        call('simulate', '--rule', 'ave', '--n', '3', '--trials', '20000', '--bias-file', str(biases))
    assert excinfo.value.returncode == 2


def test_sweep_table(cache_dir):
    output = call('sweep', '--rules', 'max,trim:2:4', '--n', '3,5', '--trials', '10000', '--seed', '2')
    rows = output.splitlines()[1:]
    assert [row.split()[:2] for row in rows] == [['max', '3'], ['max', '5'], ['trim:2:4', '5']]


def test_make_blobs_then_bench(cache_dir, tmp_path):
    data = tmp_path / "blobs.csv"
    call('make_blobs', str(data), '--patterns', '80', '--separation', '2', '--seed', '4')
    out = tmp_path / "bench.json"
    output = call('bench', '--data', str(data), '--n', '3', '--rules', 'ave,spread,trim:auto',
                  '--runs', '2', '--epochs', '10', '--hidden', '3', '--out', str(out))
    assert 'single' in output
    results = read_report(out).results
    assert [row['rule'] for row in results['rules']] == ['ave', 'spread', 'trim:auto']
    assert 'modal_cut' in results['rules'][2]


def test_bench_preset_sets_hidden_units(cache_dir, tmp_path):
    data = tmp_path / "blobs.csv"
    call('make_blobs', str(data), '--patterns', '40')
    out = tmp_path / "bench.json"
    call('bench', '--data', str(data), '--n', '2', '--rules', 'ave', '--runs', '2',
         '--epochs', '3', '--preset', 'glass', '--out', str(out))
    assert read_report(out).parameters['hidden'] == 15


def test_bench_reports_dataset_errors(cache_dir, tmp_path):
    data = tmp_path / "bad.csv"
    data.write_text("1,2,0\n1,x,1\n")
    with pytest.raises(CommandError) as excinfo:
        call('bench', '--data', str(data), '--n', '2', '--rules', 'ave', '--runs', '2')
    assert excinfo.value.returncode == 2
    assert 'line 2' in str(excinfo.value)


@pytest.mark.django_db
def test_archive_stores_the_report(cache_dir):
    call('reduce', '--rule', 'max', '--n', '4', '--archive', '--quiet')
    record = ReportRecord.objects.get()
    assert record.command == 'reduce'
    assert record.results['factor'] == pytest.approx(0.492, abs=5e-4)


def test_run_exit_codes(cache_dir, capsys):
    assert run(['reduce', '--rule', 'spread', '--n', '2']) == 0
    assert capsys.readouterr().out.strip() == '0.500'
    assert run(['plot']) == 2
    assert run([]) == 2
    assert run(['reduce', '--rule', 'spread']) == 2
    assert run(['reduce', '--rule', 'bogus', '--n', '2']) == 2


def test_run_reports_theory_violation(cache_dir, monkeypatch):
    from osfusion.management.commands import simulate as simulate_command

    monkeypatch.setattr(simulate_command, 'Z_LIMIT', -1.0)
    assert run(['simulate', '--rule', 'max', '--n', '2', '--trials', '10000']) == 3
