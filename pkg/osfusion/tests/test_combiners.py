import numpy as np
import pytest

from osfusion.combiners import (
    CombinerRule, PosteriorMatrix, RuleKind, combine, combine_stack, decide, decide_batch,
    parse_rules,
)
from osfusion.exceptions import InvalidInputError, InvalidRuleError

CASES = 2_000


def random_stack(n, seed, classes=3):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, (n, CASES, classes))


@pytest.mark.parametrize('text, expected', [
    ('ave', CombinerRule.average()),
    ('MAX', CombinerRule.maximum()),
    ('min', CombinerRule.minimum()),
    ('Med', CombinerRule.median()),
    ('spread', CombinerRule.spread()),
    ('os:3', CombinerRule.kth(3)),
    ('TRIM:2:7', CombinerRule.trim(2, 7)),
])
def test_parse_is_case_insensitive(text, expected):
    rule = CombinerRule.parse(text)
    assert rule == expected
    assert str(rule) == text.lower()


@pytest.mark.parametrize('text', ['mean', 'os:0', 'trim:3:2', 'trim:0:2', 'os:', 'trim:1'])
def test_parse_rejects_malformed_rules(text):
    with pytest.raises(InvalidRuleError):
        CombinerRule.parse(text)


def test_parse_rules_splits_on_commas():
    assert parse_rules("ave, max,trim:2:3") == [
        CombinerRule.average(), CombinerRule.maximum(), CombinerRule.trim(2, 3),
    ]


def test_ranks_exceeding_ensemble_size_are_rejected():
    matrix = PosteriorMatrix.from_rows([[0.1, 0.9], [0.2, 0.8], [0.3, 0.7]])
    with pytest.raises(InvalidRuleError):
        combine(matrix, CombinerRule.kth(5))
    with pytest.raises(InvalidRuleError):
        combine(matrix, CombinerRule.trim(2, 4))


@pytest.mark.parametrize('n, expected', [(1, (1, 1)), (3, (2, 2)), (4, (2, 3)), (7, (4, 4))])
def test_median_ranks(n, expected):
    assert CombinerRule.median().ranks(n) == expected


def test_examples_on_three_classifiers():
    matrix = PosteriorMatrix.from_rows([[0.7, 0.3], [0.6, 0.4], [0.2, 0.8]])
    assert np.allclose(combine(matrix, CombinerRule.average()).values, [0.5, 0.5])
    assert np.array_equal(combine(matrix, CombinerRule.maximum()).values, [0.7, 0.8])
    assert np.array_equal(combine(matrix, CombinerRule.minimum()).values, [0.2, 0.3])
    assert np.array_equal(combine(matrix, CombinerRule.median()).values, [0.6, 0.4])
    assert np.allclose(combine(matrix, CombinerRule.spread()).values, [0.45, 0.55])


def test_even_median_averages_the_two_middle_ranks():
    matrix = PosteriorMatrix.from_rows([[0.1, 0.9], [0.4, 0.6], [0.5, 0.5], [0.8, 0.2]])
    assert np.allclose(combine(matrix, CombinerRule.median()).values, [0.45, 0.55])


def test_single_classifier_passes_through():
    row = [0.25, 0.5, 0.25]
    for rule in [CombinerRule.average(), CombinerRule.maximum(), CombinerRule.median(),
                 CombinerRule.spread(), CombinerRule.trim(1, 1)]:
        assert np.array_equal(combine([row], rule).values, row)


def test_decide_breaks_ties_toward_lowest_class():
    matrix = PosteriorMatrix.from_rows([[0.5, 0.5], [0.5, 0.5]])
    assert decide(combine(matrix, CombinerRule.average())).class_index == 0
    assert list(decide_batch([[0.2, 0.4, 0.4], [0.9, 0.1, 0.9]])) == [1, 0]


@pytest.mark.parametrize('rows', [
    [[0.1, float('nan')], [0.2, 0.3]],
    [[0.1, float('inf')]],
    [[0.1], [0.2]],
    [],
])
def test_malformed_matrices_are_rejected(rows):
    with pytest.raises(InvalidInputError):
        PosteriorMatrix.from_rows(rows)


@pytest.mark.parametrize('n', [2, 3, 4, 5, 7, 10])
def test_full_trim_is_the_average(n):
    stack = random_stack(n, seed=n)
    full = combine_stack(stack, CombinerRule.trim(1, n))
    average = combine_stack(stack, CombinerRule.average())
    assert np.array_equal(full, average)
    assert np.allclose(average, stack.mean(axis=0), rtol=0, atol=1e-12)


@pytest.mark.parametrize('n', [2, 3, 5, 8])
def test_one_rank_trim_is_that_order_statistic(n):
    stack = random_stack(n, seed=100 + n)
    ordered = np.sort(stack, axis=0)
    for k in range(1, n + 1):
        assert np.array_equal(combine_stack(stack, CombinerRule.trim(k, k)),
                              combine_stack(stack, CombinerRule.kth(k)))
        assert np.array_equal(combine_stack(stack, CombinerRule.kth(k)), ordered[k - 1])


def test_spread_average_and_median_coincide_for_two_classifiers():
    stack = random_stack(2, seed=7)
    spread = combine_stack(stack, CombinerRule.spread())
    assert np.array_equal(spread, combine_stack(stack, CombinerRule.average()))
    assert np.array_equal(spread, combine_stack(stack, CombinerRule.median()))


@pytest.mark.parametrize('rule', [
    CombinerRule.average(), CombinerRule.maximum(), CombinerRule.minimum(),
    CombinerRule.median(), CombinerRule.spread(), CombinerRule.kth(2), CombinerRule.trim(2, 4),
])
def test_rows_can_be_permuted(rule):
    stack = random_stack(5, seed=11)
    rng = np.random.default_rng(12)
    shuffled = stack[rng.permutation(5)]
    assert np.array_equal(combine_stack(stack, rule), combine_stack(shuffled, rule))


@pytest.mark.parametrize('rule', [
    CombinerRule.average(), CombinerRule.median(), CombinerRule.spread(),
    CombinerRule.kth(3), CombinerRule.trim(2, 5),
])
def test_combined_output_lies_between_min_and_max(rule):
    stack = random_stack(6, seed=21)
    combined = combine_stack(stack, rule)
    assert np.all(combined >= stack.min(axis=0))
    assert np.all(combined <= stack.max(axis=0))


def test_identical_classifiers_give_their_common_output_exactly():
    rng = np.random.default_rng(5)
    row = rng.uniform(0.0, 1.0, (CASES, 4))
    stack = np.broadcast_to(row, (6, CASES, 4))
    for rule in [CombinerRule.average(), CombinerRule.median(), CombinerRule.spread(),
                 CombinerRule.trim(2, 5), CombinerRule.maximum()]:
        assert np.array_equal(combine_stack(stack, rule), row)


def test_resolve_names_explicit_ranks():
    assert CombinerRule.maximum().resolve(4) == CombinerRule.kth(4)
    assert CombinerRule.median().resolve(4) == CombinerRule.trim(2, 3)
    assert CombinerRule.spread().resolve(4).kind is RuleKind.SPREAD


@pytest.mark.parametrize('rule', [
    CombinerRule.average(), CombinerRule.maximum(), CombinerRule.minimum(),
    CombinerRule.median(), CombinerRule.spread(), CombinerRule.kth(2), CombinerRule.trim(2, 4),
])
def test_raising_one_output_never_lowers_the_combined_value(rule):
    stack = random_stack(5, seed=31)
    rng = np.random.default_rng(32)
    before = combine_stack(stack, rule)
    for m in range(5):
        raised = stack.copy()
        raised[m] += rng.uniform(0.0, 0.5, raised[m].shape)
        assert np.all(combine_stack(raised, rule) >= before - 1e-12)


def test_huge_opposite_outputs_do_not_overflow():
    stack = np.array([[-1e308, 0.5], [1e308, 0.5]])
    with np.errstate(over='raise'):
        spread = combine_stack(stack, CombinerRule.spread())
        average = combine_stack(np.vstack([stack, [[1e308, 0.5]]]), CombinerRule.average())
    assert np.array_equal(spread, [0.0, 0.5])
    assert average[0] == pytest.approx(1e308 / 3)
    assert average[1] == 0.5
