import numpy as np
import pytest

from osfusion.combiners import CombinerRule
from osfusion.error_model import reduction_factor
from osfusion.exceptions import InvalidInputError, InvalidRuleError
from osfusion.simulation import SimConfig, simulate, sweep, z_score


def config(**overrides):
    values = {'n_classifiers': 3, 'rule': CombinerRule.maximum(), 'trials': 20_000, 'seed': 1}
    values.update(overrides)
    return SimConfig(**values)


@pytest.mark.parametrize('overrides, error', [
    ({'trials': 9_999}, InvalidInputError),
    ({'noise_sigma': 0.0}, InvalidInputError),
    ({'s': -1.0}, InvalidInputError),
    ({'seed': -1}, InvalidInputError),
    ({'rule': CombinerRule.kth(4)}, InvalidRuleError),
    ({'biases': np.zeros((2, 2))}, InvalidInputError),
])
def test_config_validation(overrides, error):
    with pytest.raises(error):
        config(**overrides)


def test_same_seed_gives_identical_results():
    assert simulate(config()) == simulate(config())
    assert simulate(config()) != simulate(config(seed=2))


def test_result_does_not_depend_on_workers():
    serial = simulate(config(trials=50_000), block_size=8_192)
    parallel = simulate(config(trials=50_000), workers=3, block_size=8_192)
    assert serial == parallel


def test_single_classifier_ratio_is_exactly_one():
    result = simulate(config(n_classifiers=1, rule=CombinerRule.average()))
    assert result.ratio == 1.0
    assert result.std_error == 0.0
    assert z_score(result, 1.0) == 0.0


def test_constant_bias_shifts_the_mean_offset():
    biases = np.tile([0.05, -0.05], (4, 1))
    result = simulate(config(n_classifiers=4, rule=CombinerRule.average(), biases=biases, trials=40_000))
    assert result.mean_offset == pytest.approx(0.1, abs=5 * result.offset_std_error)


def test_unbiased_offset_is_centred():
    result = simulate(config(n_classifiers=5, rule=CombinerRule.median()))
    assert abs(result.mean_offset) <= 5 * result.offset_std_error


def test_sweep_skips_undefined_pairs(moment_table):
    rows = sweep([CombinerRule.trim(2, 4), CombinerRule.maximum()], [3, 5],
                 trials=10_000, seed=3, table=moment_table)
    assert [(str(row.rule), row.n) for row in rows] == [('trim:2:4', 5), ('max', 3), ('max', 5)]
    assert rows[0].analytic == reduction_factor(CombinerRule.trim(2, 4), 5, moment_table).value


def theory_cases():
    cases = []
    for n in (2, 3, 5, 8, 10):
        rules = [CombinerRule.maximum(), CombinerRule.minimum(), CombinerRule.median(), CombinerRule.spread()]
        if n >= 3:
            rules.append(CombinerRule.trim(2, n - 1))
        cases.extend((rule, n) for rule in rules)
    return cases


@pytest.mark.slow
@pytest.mark.parametrize('rule, n', theory_cases(), ids=str)
def test_simulation_matches_reduction_factor(moment_table, rule, n):
    result = simulate(SimConfig(n_classifiers=n, rule=rule, trials=1_000_000, seed=n))
    factor = reduction_factor(rule, n, moment_table)
    assert abs(z_score(result, factor)) <= 4.0


def test_scaling_noise_and_biases_scales_the_error_quadratically():
    biases = np.array([[0.02, -0.01], [0.0, 0.03], [-0.02, 0.0]])
    base = simulate(config(biases=biases))
    scaled = simulate(config(noise_sigma=0.3, biases=3.0 * biases))
    assert scaled.empirical_error == pytest.approx(9.0 * base.empirical_error, rel=1e-9)
    assert scaled.ratio == pytest.approx(base.ratio, rel=1e-9)


def test_spread_and_average_agree_draw_for_draw_on_two_classifiers():
    spread = simulate(config(n_classifiers=2, rule=CombinerRule.spread(), seed=17))
    average = simulate(config(n_classifiers=2, rule=CombinerRule.average(), seed=17))
    assert spread.ratio == average.ratio
    assert spread.empirical_error == average.empirical_error


@pytest.mark.parametrize('rule', [
    CombinerRule.average(), CombinerRule.maximum(), CombinerRule.minimum(),
    CombinerRule.median(), CombinerRule.spread(), CombinerRule.kth(2), CombinerRule.trim(2, 3),
])
def test_constant_bias_shifts_every_rule_by_the_same_amount(rule):
    biases = np.tile([0.05, -0.05], (4, 1))
    unbiased = simulate(config(n_classifiers=4, rule=rule))
    biased = simulate(config(n_classifiers=4, rule=rule, biases=biases))
    assert biased.mean_offset - unbiased.mean_offset == pytest.approx(0.1, abs=1e-9)
