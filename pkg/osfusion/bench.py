# osfusion/bench.py
"""
Ensemble benchmark: train N small networks per run, combine their posterior
estimates with each rule and report test misclassification over repeated runs.

Each run draws a fresh split (unless ``fixed_split``) and fresh weight seeds.
In the variability regime the last floor(N/2) networks are stopped at half
their best-validation epoch, giving an ensemble of uneven quality.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .combiners import CombinerRule, combine_stack, decide_batch
from .datasets import Dataset, SplitSpec, load_dataset, split
from .exceptions import InvalidInputError, InvalidRuleError, TrainingFailureError
from .mlp import MLPConfig, train_mlp

logger = logging.getLogger(__name__)

MIN_PATTERNS = 10
MIN_RUNS = 2
CI_Z = 1.96
VARIABILITY_FRACTION = 0.5


@dataclass(frozen=True)
class AutoTrim:
    """Trimmed mean whose cut points are picked on the validation set each run."""

    def __str__(self):
        return 'trim:auto'


AUTO_TRIM = AutoTrim()


def parse_bench_rules(text):
    """Comma-separated rules; ``trim:auto`` is accepted alongside the fixed ones."""
    tokens = [token.strip() for token in str(text).split(',') if token.strip()]
    if not tokens:
        raise InvalidRuleError("no combiner rules given")
    return [AUTO_TRIM if token.lower() == 'trim:auto' else CombinerRule.parse(token)
            for token in tokens]


@dataclass(frozen=True)
class RuleSummary:
    """
    Test error of one rule across runs.

    Attributes:
        rule: canonical rule text
        mean_error_pct: mean test misclassification, in percent
        ci95_halfwidth: 1.96 x sample std / sqrt(runs)
        run_errors: per-run test error, in percent
        modal_cut: most frequent (N1, N2) for ``trim:auto``
    """
    rule: str
    mean_error_pct: float
    ci95_halfwidth: float
    run_errors: tuple = field(default=(), repr=False)
    modal_cut: tuple | None = None

    def as_record(self):
        record = {
            'rule': self.rule,
            'mean_error_pct': self.mean_error_pct,
            'ci95': self.ci95_halfwidth,
            'run_errors': list(self.run_errors),
        }
        if self.modal_cut is not None:
            record['modal_cut'] = list(self.modal_cut)
        return record


@dataclass(frozen=True)
class EvalReport:
    per_rule: dict
    per_classifier: RuleSummary
    runs: int
    n_classifiers: int
    chosen_trim: tuple | None = None
    trim_cuts: tuple = ()

    def __post_init__(self):
        if self.runs < MIN_RUNS:
            raise InvalidInputError(f"a report needs at least {MIN_RUNS} runs, got {self.runs}")

    def as_results(self):
        return {
            'runs': self.runs,
            'n_classifiers': self.n_classifiers,
            'rules': [summary.as_record() for summary in self.per_rule.values()],
            'single_classifier': self.per_classifier.as_record(),
            'chosen_trim': list(self.chosen_trim) if self.chosen_trim else None,
            'trim_cuts': [list(cut) for cut in self.trim_cuts],
        }


def error_pct(combined, labels):
    """Misclassification of a (P, L) combined output against labels, in percent."""
    return float(100.0 * np.mean(decide_batch(combined) != labels))


def _trim_search(stack, labels):
    n = stack.shape[0]
    best = None
    for n1 in range(1, n + 1):
        for n2 in range(n1, n + 1):
            error = error_pct(combine_stack(stack, CombinerRule.trim(n1, n2)), labels)
            # lower error, then wider window, then smaller N1
            score = (error, -(n2 - n1), n1)
            if best is None or score < best[0]:
                best = (score, (n1, n2))
    return best[1]


def posterior_stack(ensemble, features):
    """Stack each model's (P, L) posteriors into an (N, P, L) array."""
    return np.stack([model.predict_posteriors(features) for model in ensemble])


def select_trim_cut(ensemble, validation):
    """
    Choose the trimmed-mean cut points on the validation set.

    Every (N1, N2) with 1 <= N1 <= N2 <= N is tried; ties go to the wider
    window, then to the smaller N1.

    Returns:
        tuple: (N1, N2)
    """
    if not ensemble:
        raise InvalidInputError("cannot select trim cut points for an empty ensemble")
    if len(validation) == 0:
        raise InvalidInputError("trim cut selection needs a non-empty validation set")
    return _trim_search(posterior_stack(ensemble, validation.features), validation.labels)


def _derived_seed(*entropy):
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


@dataclass(frozen=True)
class RunOutcome:
    rule_errors: tuple
    classifier_errors: tuple
    trim_cut: tuple | None


def _run_once(task):
    dataset, run, n, rules, mlp, variability, seed, fixed_split, split_spec = task

    split_seed = split_spec.seed if fixed_split else _derived_seed(seed, run, 0)
    train, validation, test = split(dataset, replace(split_spec, seed=split_seed))

    ensemble = []
    for m in range(n):
        under_trained = variability and m >= n - n // 2
        config = replace(
            mlp,
            seed=_derived_seed(seed, run, 1, m),
            early_stop_fraction=VARIABILITY_FRACTION if under_trained else mlp.early_stop_fraction,
        )
        try:
            ensemble.append(train_mlp(train, validation, config))
        except TrainingFailureError as exc:
            raise TrainingFailureError(
                f"run {run + 1}, classifier {m + 1}: {exc}", epoch=exc.epoch, loss=exc.loss,
            ) from exc

    test_stack = posterior_stack(ensemble, test.features)
    classifier_errors = tuple(error_pct(outputs, test.labels) for outputs in test_stack)

    trim_cut = None
    rule_errors = []
    for rule in rules:
        if isinstance(rule, AutoTrim):
            if trim_cut is None:
                trim_cut = _trim_search(
                    posterior_stack(ensemble, validation.features), validation.labels,
                )
            rule = CombinerRule.trim(*trim_cut)
        rule_errors.append(error_pct(combine_stack(test_stack, rule), test.labels))

    logger.info("run %d: single %.2f%%, %s", run + 1, float(np.mean(classifier_errors)),
                ", ".join(f"{r} {e:.2f}%" for r, e in zip(rules, rule_errors)))
    return RunOutcome(tuple(rule_errors), classifier_errors, trim_cut)


def _summarize(rule, values, modal_cut=None):
    values = np.asarray(values, dtype=float)
    half_width = CI_Z * float(np.std(values, ddof=1)) / math.sqrt(values.size)
    return RuleSummary(
        rule=rule,
        mean_error_pct=float(np.mean(values)),
        ci95_halfwidth=half_width,
        run_errors=tuple(float(v) for v in values),
        modal_cut=modal_cut,
    )


def _modal_cut(cuts):
    counts = Counter(cuts)
    return min(counts, key=lambda cut: (-counts[cut], cut))


def evaluate(dataset, n_classifiers, rules, runs, mlp=None, variability=False, seed=0,
             fixed_split=False, split_spec=None, workers=1):
    """
    Run the ensemble benchmark.

    Args:
        dataset: a Dataset or the path of a labeled CSV
        n_classifiers (int): ensemble size N
        rules (list): CombinerRule objects and/or AUTO_TRIM
        runs (int): number of repetitions, >= 2
        mlp (MLPConfig): network settings shared by every classifier
        variability (bool): under-train the last floor(N/2) networks
        seed (int): master seed; per-run split and weight seeds derive from it
        fixed_split (bool): reuse the ``split_spec`` seed for every run
        split_spec (SplitSpec): split fractions (default 50/25/25)
        workers (int): runs in parallel; does not change the report

    Returns:
        EvalReport

    Raises:
        InvalidInputError: too few runs or patterns, no rules
        InvalidRuleError: a rule undefined for N
        TrainingFailureError: a network diverged; names the run and classifier
    """
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)
    mlp = mlp or MLPConfig()
    split_spec = split_spec or SplitSpec(seed=seed)
    rules = list(rules)

    if runs < MIN_RUNS:
        raise InvalidInputError(f"runs must be >= {MIN_RUNS}, got {runs}")
    if n_classifiers < 1:
        raise InvalidInputError(f"n_classifiers must be >= 1, got {n_classifiers}")
    if not rules:
        raise InvalidInputError("no combiner rules given")
    if len(dataset) < MIN_PATTERNS:
        raise InvalidInputError(f"dataset needs at least {MIN_PATTERNS} patterns, got {len(dataset)}")
    for rule in rules:
        if not isinstance(rule, AutoTrim):
            rule.validate_for(n_classifiers)

    tasks = [
        (dataset, run, n_classifiers, rules, mlp, variability, seed, fixed_split, split_spec)
        for run in range(runs)
    ]
    logger.info("benchmark: %d runs of N=%d on %d patterns%s",
                runs, n_classifiers, len(dataset), " (variability)" if variability else "")
    if workers > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_once, tasks))
    else:
        outcomes = [_run_once(task) for task in tasks]

    trim_cuts = tuple(o.trim_cut for o in outcomes if o.trim_cut is not None)
    chosen_trim = _modal_cut(trim_cuts) if trim_cuts else None

    per_rule = {}
    for index, rule in enumerate(rules):
        values = [o.rule_errors[index] for o in outcomes]
        modal = chosen_trim if isinstance(rule, AutoTrim) else None
        per_rule[str(rule)] = _summarize(str(rule), values, modal_cut=modal)

    single = _summarize('single', [float(np.mean(o.classifier_errors)) for o in outcomes])
    return EvalReport(
        per_rule=per_rule,
        per_classifier=single,
        runs=runs,
        n_classifiers=n_classifiers,
        chosen_trim=chosen_trim,
        trim_cuts=trim_cuts,
    )
