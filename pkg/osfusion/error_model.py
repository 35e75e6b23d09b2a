# osfusion/error_model.py
"""
Boundary-offset error model for two-class decision boundaries.

A classifier whose posterior estimates carry bias beta and noise eta moves
the decision boundary by an offset b. To first order the added error is
A(b) = s b^2 / 2, where s is the difference of posterior slopes at the
ideal boundary, so the model error is (s / 2) E[b^2]. Combining N
classifiers shrinks the variance part of E[b^2] by a reduction factor that
depends only on the rule and on Gaussian order-statistic moments.

All factors assume i.i.d. Gaussian noise across classifiers and classes;
correlated noise is not modelled.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .combiners import CombinerRule, RuleKind, combine_stack
from .exceptions import InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundarySpec:
    """
    Two-class boundary model.

    Attributes:
        s: posterior slope difference p'_j(x*) - p'_i(x*), > 0
        sigma_b: std dev of a single classifier's boundary offset
        beta_m: a single classifier's mean offset
        sigma_beta: std dev of the boundary biases across classifiers
        beta_bar: mean boundary bias across classifiers
    """
    s: float
    sigma_b: float = 0.0
    beta_m: float = 0.0
    sigma_beta: float = 0.0
    beta_bar: float = 0.0

    def __post_init__(self):
        for name in ('s', 'sigma_b', 'beta_m', 'sigma_beta', 'beta_bar'):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInputError(f"{name} must be finite, got {getattr(self, name)}")
        if self.s <= 0:
            raise InvalidInputError(f"slope difference s must be > 0, got {self.s}")
        if self.sigma_b < 0:
            raise InvalidInputError(f"sigma_b must be >= 0, got {self.sigma_b}")
        if self.sigma_beta < 0:
            raise InvalidInputError(f"sigma_beta must be >= 0, got {self.sigma_beta}")


@dataclass(frozen=True)
class OffsetMoments:
    """First and second moments of the boundary offset (m2 >= m1^2)."""
    m1: float
    m2: float

    def __post_init__(self):
        # allow for rounding when the variance part is zero
        if self.m2 < self.m1 ** 2 * (1.0 - 1e-12):
            raise InvalidInputError(f"second moment {self.m2} is below the squared mean {self.m1 ** 2}")

    @property
    def variance(self):
        return max(self.m2 - self.m1 ** 2, 0.0)


@dataclass(frozen=True)
class ReductionFactor:
    value: float
    rule: CombinerRule
    n: int

    def __float__(self):
        return self.value


class BiasStatistics(NamedTuple):
    beta_bar: float
    sigma_beta: float
    beta_rule: float


class ErrorDecomposition(NamedTuple):
    reduced: float
    interaction: float

    @property
    def total(self):
        return self.reduced + self.interaction


def sigma_b_from_noise(noise_sigma, s):
    """Std dev of a single classifier's boundary offset when each class output has noise sigma."""
    return math.sqrt(2.0) * noise_sigma / s


def single_model_error(spec, biased=False):
    """
    Model error of one classifier.

    unbiased: s sigma_b^2 / 2; biased: (s / 2)(sigma_b^2 + beta_m^2)
    """
    if biased:
        return spec.s / 2.0 * (spec.sigma_b ** 2 + spec.beta_m ** 2)
    return spec.s * spec.sigma_b ** 2 / 2.0


def _trim_factor(table, n, lo, hi):
    count = hi - lo + 1
    total = sum(table.variance(n, m) for m in range(lo, hi + 1))
    total += 2.0 * sum(
        table.covariance(n, m, l) for m in range(lo, hi + 1) for l in range(m + 1, hi + 1)
    )
    return total / count ** 2


def reduction_factor(rule, n, table):
    """
    Variance reduction of the boundary offset when ``rule`` combines n classifiers.

    Args:
        rule (CombinerRule): combining rule valid for n
        n (int): ensemble size
        table (MomentTable): moments covering n

    Returns:
        ReductionFactor

    Raises:
        InvalidRuleError: if the rule is not defined for n
        TableCoverageError: if the table does not cover n
    """
    rule.validate_for(n)
    kind = rule.kind

    if kind is RuleKind.AVERAGE:
        value = 1.0 / n
    elif kind is RuleKind.SPREAD:
        value = (table.variance(n, 1) + table.covariance(n, 1, n)) / 2.0
    elif kind is RuleKind.MEDIAN and n % 2 == 0:
        middle = n // 2
        value = table.variance(n, middle) / 2.0 + table.covariance(n, middle, middle + 1) / 2.0
    else:
        lo, hi = rule.ranks(n)
        if lo == hi:
            value = table.variance(n, lo)
        else:
            value = _trim_factor(table, n, lo, hi)

    return ReductionFactor(value=value, rule=rule, n=n)


def offset_moments(spec, factor):
    """
    Boundary-offset moments after combining: m1 = beta_bar and
    m2 = factor (sigma_b^2 + sigma_beta^2) + beta_bar^2.
    """
    variance = factor * (spec.sigma_b ** 2 + spec.sigma_beta ** 2)
    return OffsetMoments(m1=spec.beta_bar, m2=variance + spec.beta_bar ** 2)


def model_error(moments, s):
    """First-order model error (s / 2) M2."""
    return s / 2.0 * moments.m2


def _check_factor(value, name):
    if not 0.0 < value <= 1.0:
        raise InvalidInputError(f"{name} must lie in (0, 1], got {value}")


def os_error_biased(spec, alpha):
    """
    Model error of a single order-statistic combiner with biased classifiers:
    (s / 2)(alpha (sigma_b^2 + sigma_beta^2) + beta_bar^2).
    """
    _check_factor(alpha, 'alpha')
    return model_error(offset_moments(spec, alpha), spec.s)


def trim_error_biased(spec, a_factor, beta_trim):
    """
    Model error of a trimmed-mean combiner with biased classifiers:
    (s / 2)(A (sigma_b^2 + sigma_beta^2) + beta_trim^2).
    """
    _check_factor(a_factor, 'a_factor')
    if not math.isfinite(beta_trim):
        raise InvalidInputError(f"beta_trim must be finite, got {beta_trim}")
    variance = a_factor * (spec.sigma_b ** 2 + spec.sigma_beta ** 2)
    return spec.s / 2.0 * (variance + beta_trim ** 2)


def spread_error_biased(spec, table, n, beta_spr):
    """
    Model error of the spread combiner with biased classifiers, using
    r = (alpha_{1:N} + B_{1,N:N}) / 2 in place of alpha.
    """
    if not math.isfinite(beta_spr):
        raise InvalidInputError(f"beta_spr must be finite, got {beta_spr}")
    factor = reduction_factor(CombinerRule.spread(), n, table).value
    variance = factor * (spec.sigma_b ** 2 + spec.sigma_beta ** 2)
    return spec.s / 2.0 * (variance + beta_spr ** 2)


def error_decomposition(spec, factor):
    """
    Split the biased combined error into the part scaled down from a single
    classifier's error and the bias-interaction part:

        factor * E_model^m(beta) + (s / 2)(factor sigma_beta^2 + beta_bar^2 - factor beta_m^2)

    A small factor only pays off in the second term when the spread of the
    biases exceeds the bias itself.
    """
    reduced = factor * single_model_error(spec, biased=True)
    interaction = spec.s / 2.0 * (
        factor * spec.sigma_beta ** 2 + spec.beta_bar ** 2 - factor * spec.beta_m ** 2
    )
    return ErrorDecomposition(reduced=reduced, interaction=interaction)


def bias_statistics(pairs, s, rule=None):
    """
    Aggregate per-classifier class biases into boundary-bias statistics.

    Args:
        pairs: sequence of (beta_i, beta_j) per classifier
        s: slope difference
        rule: optional CombinerRule; selects the bias term that survives
            combining (spread: half the sum of the min and max boundary
            biases; trim and single ranks: the mean over the retained ranks,
            with each class's biases ranked separately). Without a rule the
            plain mean is returned.

    Returns:
        BiasStatistics(beta_bar, sigma_beta, beta_rule)
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
        raise InvalidInputError(f"bias pairs must have shape (N, 2), got {pairs.shape}")
    if s <= 0:
        raise InvalidInputError(f"slope difference s must be > 0, got {s}")

    beta_i = pairs[:, 0]
    beta_j = pairs[:, 1]
    beta_bar = float((beta_i.mean() - beta_j.mean()) / s)
    sigma_beta = float(math.sqrt((beta_i.var() + beta_j.var()) / s ** 2))

    if rule is None or rule.kind is RuleKind.AVERAGE:
        beta_rule = beta_bar
    else:
        combined = combine_stack(pairs, rule)
        beta_rule = float((combined[0] - combined[1]) / s)
    return BiasStatistics(beta_bar=beta_bar, sigma_beta=sigma_beta, beta_rule=beta_rule)
