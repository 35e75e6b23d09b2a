# osfusion/simulation.py
"""
Monte Carlo simulation of the two-class boundary model.

Each trial draws class-i and class-j output errors (bias + Gaussian noise)
for N classifiers, combines each class's N values with a rule, converts the
difference into a boundary offset b = (e_i - e_j) / s and scores the added
error A(b) = s b^2 / 2. Classifier 1 alone, on the same draws, gives the
single-classifier baseline.

Trials run in fixed-size blocks; block ``b`` draws from
``numpy.random.default_rng([seed, b])`` and block sums are merged in block
order, so the result is the same whatever the number of workers.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .combiners import CombinerRule, combine_stack
from .error_model import reduction_factor
from .exceptions import InvalidInputError
from .moments import build_table

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
DEFAULT_BLOCK_SIZE = 65_536

# running sums kept per block
_A, _S, _AA, _SS, _AS, _B, _BB = range(7)


@dataclass(frozen=True)
class SimConfig:
    """
    Attributes:
        n_classifiers: ensemble size N >= 1
        rule: combiner applied to each class's N outputs
        s: slope difference > 0
        noise_sigma: std dev of the noise per class per classifier, > 0
        biases: optional (N, 2) array of per-classifier (beta_i, beta_j)
        trials: number of trials, >= 10^4
        seed: integer seed
    """
    n_classifiers: int
    rule: CombinerRule
    s: float = 1.0
    noise_sigma: float = 0.1
    biases: np.ndarray | None = field(default=None, compare=False)
    trials: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.n_classifiers < 1:
            raise InvalidInputError(f"n_classifiers must be >= 1, got {self.n_classifiers}")
        self.rule.validate_for(self.n_classifiers)
        if not self.s > 0:
            raise InvalidInputError(f"s must be > 0, got {self.s}")
        if not self.noise_sigma > 0:
            raise InvalidInputError(f"noise_sigma must be > 0, got {self.noise_sigma}")
        if self.trials < MIN_TRIALS:
            raise InvalidInputError(f"trials must be >= {MIN_TRIALS}, got {self.trials}")
        if self.seed < 0:
            raise InvalidInputError(f"seed must be >= 0, got {self.seed}")
        if self.biases is not None:
            biases = np.array(self.biases, dtype=float)
            if biases.shape != (self.n_classifiers, 2):
                raise InvalidInputError(
                    f"biases must have one (beta_i, beta_j) pair per classifier: "
                    f"expected shape ({self.n_classifiers}, 2), got {biases.shape}"
                )
            if not np.all(np.isfinite(biases)):
                raise InvalidInputError("biases must be finite")
            biases.setflags(write=False)
            object.__setattr__(self, 'biases', biases)

    @property
    def is_biased(self):
        return self.biases is not None and bool(np.any(self.biases != 0.0))


@dataclass(frozen=True)
class SimResult:
    empirical_error: float
    single_error: float
    ratio: float
    std_error: float
    mean_offset: float
    offset_std_error: float
    trials: int


def _simulate_block(config, block, rows):
    n = config.n_classifiers
    rng = np.random.default_rng([config.seed, block])
    noise = rng.standard_normal((2, n, rows)) * config.noise_sigma

    errors_i = noise[0]
    errors_j = noise[1]
    if config.biases is not None:
        errors_i = errors_i + config.biases[:, 0:1]
        errors_j = errors_j + config.biases[:, 1:2]

    offset = (combine_stack(errors_i, config.rule) - combine_stack(errors_j, config.rule)) / config.s
    single_offset = (errors_i[0] - errors_j[0]) / config.s
    added = config.s * offset ** 2 / 2.0
    single_added = config.s * single_offset ** 2 / 2.0

    sums = np.empty(7)
    sums[_A] = added.sum()
    sums[_S] = single_added.sum()
    sums[_AA] = np.square(added).sum()
    sums[_SS] = np.square(single_added).sum()
    sums[_AS] = (added * single_added).sum()
    sums[_B] = offset.sum()
    sums[_BB] = np.square(offset).sum()
    return sums


def _run_block(args):
    return _simulate_block(*args)


def _blocks(trials, block_size):
    blocks = []
    remaining = trials
    index = 0
    while remaining > 0:
        rows = min(block_size, remaining)
        blocks.append((index, rows))
        remaining -= rows
        index += 1
    return blocks


def simulate(config, workers=1, block_size=DEFAULT_BLOCK_SIZE):
    """
    Measure the combined and single-classifier model errors by simulation.

    Args:
        config (SimConfig): simulation parameters
        workers (int): process-pool size; does not change the result
        block_size (int): trials per random block; changes the streams, so
            keep it fixed when comparing runs

    Returns:
        SimResult: errors, their ratio with a delta-method standard error, and
        the mean boundary offset
    """
    blocks = _blocks(config.trials, block_size)
    tasks = [(config, index, rows) for index, rows in blocks]
    logger.debug("simulating %s with N=%d: %d trials in %d blocks",
                 config.rule, config.n_classifiers, config.trials, len(blocks))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_run_block, tasks))
    else:
        partials = [_run_block(task) for task in tasks]

    sums = np.zeros(7)
    for partial in partials:
        sums += partial

    t = float(config.trials)
    mean_a = sums[_A] / t
    mean_s = sums[_S] / t
    ratio = mean_a / mean_s

    var_a = sums[_AA] / t - mean_a ** 2
    var_s = sums[_SS] / t - mean_s ** 2
    cov_as = sums[_AS] / t - mean_a * mean_s
    var_ratio = (var_a - 2.0 * ratio * cov_as + ratio ** 2 * var_s) / (t * mean_s ** 2)

    mean_b = sums[_B] / t
    var_b = sums[_BB] / t - mean_b ** 2

    return SimResult(
        empirical_error=float(mean_a),
        single_error=float(mean_s),
        ratio=float(ratio),
        std_error=float(math.sqrt(max(var_ratio, 0.0))),
        mean_offset=float(mean_b),
        offset_std_error=float(math.sqrt(max(var_b, 0.0) / t)),
        trials=config.trials,
    )


def z_score(result, factor):
    """(empirical ratio - analytic factor) / std error; 0 when both agree exactly."""
    delta = result.ratio - float(factor)
    if result.std_error == 0.0:
        return 0.0 if delta == 0.0 else math.copysign(math.inf, delta)
    return delta / result.std_error


@dataclass(frozen=True)
class SweepRow:
    rule: CombinerRule
    n: int
    ratio: float
    std_error: float
    analytic: float
    z: float

    def as_record(self):
        return {
            'rule': str(self.rule),
            'n': self.n,
            'ratio': self.ratio,
            'std_error': self.std_error,
            'analytic': self.analytic,
            'z': self.z,
        }


def sweep(rules, n_values, trials, seed, table=None, s=1.0, noise_sigma=0.1,
          workers=1, block_size=DEFAULT_BLOCK_SIZE):
    """
    Simulate every (rule, n) pair and set the ratios beside the analytic factors.

    Pairs where the rule is undefined for n (e.g. ``trim:2:4`` at n = 3) are
    skipped. Cell c of the sweep uses seed ``(seed, c)``.

    Returns:
        list[SweepRow]
    """
    rules = list(rules)
    n_values = list(n_values)
    if not rules or not n_values:
        raise InvalidInputError("sweep needs at least one rule and one ensemble size")
    if table is None:
        table = build_table(max(n_values))

    rows = []
    cell = 0
    for rule in rules:
        for n in n_values:
            if not rule.is_defined_for(n):
                logger.info("skipping %s at N=%d: rule undefined", rule, n)
                continue
            cell_seed = int(np.random.SeedSequence([seed, cell]).generate_state(1)[0])
            cell += 1
            config = SimConfig(
                n_classifiers=n, rule=rule, s=s, noise_sigma=noise_sigma,
                trials=trials, seed=cell_seed,
            )
            result = simulate(config, workers=workers, block_size=block_size)
            factor = reduction_factor(rule, n, table).value
            rows.append(SweepRow(
                rule=rule, n=n, ratio=result.ratio, std_error=result.std_error,
                analytic=factor, z=z_score(result, factor),
            ))
            logger.info("%s N=%d: ratio %.4f +/- %.4f (analytic %.4f)",
                        rule, n, result.ratio, result.std_error, factor)
    return rows
