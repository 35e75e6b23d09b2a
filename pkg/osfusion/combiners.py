# osfusion/combiners.py
"""
Order-statistics combiners.

Every rule maps the N classifier outputs for one class to a single combined
output. Rules work on the column sorted in ascending order; ranks are
1-indexed (``k:N`` notation), class indices are 0-indexed.
"""

import enum
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError, InvalidRuleError

logger = logging.getLogger(__name__)


class RuleKind(str, enum.Enum):
    AVERAGE = 'ave'
    MAX = 'max'
    MIN = 'min'
    MEDIAN = 'med'
    KTH = 'os'
    SPREAD = 'spread'
    TRIM = 'trim'


_SIMPLE_KINDS = {
    'ave': RuleKind.AVERAGE,
    'max': RuleKind.MAX,
    'min': RuleKind.MIN,
    'med': RuleKind.MEDIAN,
    'spread': RuleKind.SPREAD,
}
_KTH_RE = re.compile(r'^os:(\d+)$')
_TRIM_RE = re.compile(r'^trim:(\d+):(\d+)$')


@dataclass(frozen=True)
class CombinerRule:
    """
    A combining rule.

    Attributes:
        kind: which family the rule belongs to
        k: rank for ``os:k`` (1 <= k <= N)
        n1, n2: first and last retained rank for ``trim:N1:N2`` (inclusive)

    ``max`` and ``min`` are kept as their own kinds so they can be written
    without knowing N; ``ranks(n)`` resolves them to ``os:N`` and ``os:1``.
    """
    kind: RuleKind
    k: int | None = None
    n1: int | None = None
    n2: int | None = None

    def __post_init__(self):
        if self.kind is RuleKind.KTH:
            if self.k is None or self.k < 1:
                raise InvalidRuleError(f"os:k needs a rank k >= 1, got {self.k}")
        elif self.k is not None:
            raise InvalidRuleError(f"rank k only applies to os:k rules, not {self.kind.value}")

        if self.kind is RuleKind.TRIM:
            if self.n1 is None or self.n2 is None or not 1 <= self.n1 <= self.n2:
                raise InvalidRuleError(
                    f"trim:N1:N2 needs 1 <= N1 <= N2, got N1={self.n1}, N2={self.n2}"
                )
        elif self.n1 is not None or self.n2 is not None:
            raise InvalidRuleError(f"trim cut points only apply to trim rules, not {self.kind.value}")

    # constructors

    @classmethod
    def average(cls):
        return cls(RuleKind.AVERAGE)

    @classmethod
    def maximum(cls):
        return cls(RuleKind.MAX)

    @classmethod
    def minimum(cls):
        return cls(RuleKind.MIN)

    @classmethod
    def median(cls):
        return cls(RuleKind.MEDIAN)

    @classmethod
    def spread(cls):
        return cls(RuleKind.SPREAD)

    @classmethod
    def kth(cls, k):
        return cls(RuleKind.KTH, k=k)

    @classmethod
    def trim(cls, n1, n2):
        return cls(RuleKind.TRIM, n1=n1, n2=n2)

    @classmethod
    def parse(cls, text):
        """
        Parse the canonical text form (case-insensitive).

        Accepted: ``ave``, ``max``, ``min``, ``med``, ``os:k``, ``spread``,
        ``trim:N1:N2``.
        """
        token = str(text).strip().lower()
        if token in _SIMPLE_KINDS:
            return cls(_SIMPLE_KINDS[token])

        match = _KTH_RE.match(token)
        if match:
            return cls.kth(int(match.group(1)))

        match = _TRIM_RE.match(token)
        if match:
            return cls.trim(int(match.group(1)), int(match.group(2)))

        raise InvalidRuleError(
            f"unknown combiner rule {text!r}; expected one of "
            "ave, max, min, med, os:k, spread, trim:N1:N2"
        )

    def __str__(self):
        if self.kind is RuleKind.KTH:
            return f"os:{self.k}"
        if self.kind is RuleKind.TRIM:
            return f"trim:{self.n1}:{self.n2}"
        return self.kind.value

    # rank resolution

    def validate_for(self, n):
        """Raise InvalidRuleError unless the rule is defined for an ensemble of size n."""
        if n < 1:
            raise InvalidRuleError(f"ensemble size must be >= 1, got {n}")
        if self.kind is RuleKind.KTH and self.k > n:
            raise InvalidRuleError(f"rule {self} needs k <= N, but N={n}")
        if self.kind is RuleKind.TRIM and self.n2 > n:
            raise InvalidRuleError(f"rule {self} needs N2 <= N, but N={n}")

    def is_defined_for(self, n):
        try:
            self.validate_for(n)
        except InvalidRuleError:
            return False
        return True

    def ranks(self, n):
        """
        Return the inclusive rank window ``(lo, hi)`` the rule averages over.

        Spread is the one rule that is not a window (it averages ranks 1 and N
        only) and returns ``(1, n)`` with ``is_window`` False.
        """
        self.validate_for(n)
        kind = self.kind
        if kind is RuleKind.AVERAGE or kind is RuleKind.SPREAD:
            return 1, n
        if kind is RuleKind.MAX:
            return n, n
        if kind is RuleKind.MIN:
            return 1, 1
        if kind is RuleKind.KTH:
            return self.k, self.k
        if kind is RuleKind.TRIM:
            return self.n1, self.n2
        # median: middle rank, or the two middle ranks for even n
        if n % 2:
            middle = (n + 1) // 2
            return middle, middle
        return n // 2, n // 2 + 1

    @property
    def is_window(self):
        return self.kind is not RuleKind.SPREAD

    def resolve(self, n):
        """Return the equivalent ``os:k`` / ``trim`` rule with explicit ranks for size n."""
        lo, hi = self.ranks(n)
        if not self.is_window:
            return self
        if lo == hi:
            return CombinerRule.kth(lo)
        return CombinerRule.trim(lo, hi)


def parse_rules(text):
    """Parse a comma-separated list of rules, e.g. ``"ave,max,trim:2:3"``."""
    tokens = [token for token in str(text).split(',') if token.strip()]
    if not tokens:
        raise InvalidRuleError("no combiner rules given")
    return [CombinerRule.parse(token) for token in tokens]


@dataclass(frozen=True)
class PosteriorMatrix:
    """
    N classifiers x L classes of posterior estimates for one input pattern.

    Entries need not lie in [0, 1] nor sum to one; they only have to be finite.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidInputError(f"posterior matrix must be 2-D, got shape {values.shape}")
        n, n_classes = values.shape
        if n < 1:
            raise InvalidInputError("posterior matrix needs at least one classifier row")
        if n_classes < 2:
            raise InvalidInputError(f"posterior matrix needs at least 2 classes, got {n_classes}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("posterior matrix contains NaN or infinite entries")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_rows(cls, rows):
        return cls(np.asarray(rows, dtype=float))

    @property
    def n_classifiers(self):
        return self.values.shape[0]

    @property
    def n_classes(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class CombinedPosterior:
    values: np.ndarray
    rule: CombinerRule

    @property
    def n_classes(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class ClassDecision:
    class_index: int
    combined: CombinedPosterior = field(repr=False)


def _window_mean(ordered, lo, hi):
    """
    Mean of ranks lo..hi of an array sorted along axis 0.

    Written as ``low + sum(x - low) / m`` and clipped to [low, high] so that
    equal inputs give that input back exactly and the result never leaves
    the retained range. Columns whose offsets overflow fall back to
    ``sum(x / m)``.
    """
    low = ordered[lo - 1]
    if lo == hi:
        return low.copy()
    high = ordered[hi - 1]
    count = hi - lo + 1
    window = ordered[lo - 1:hi]
    with np.errstate(over='ignore', invalid='ignore'):
        mean = low + (window - low).sum(axis=0) / count
    wide = ~np.isfinite(mean)
    if np.any(wide):
        mean = np.where(wide, (window / count).sum(axis=0), mean)
    return np.clip(mean, low, high)


def _midrange(ordered):
    low = ordered[0]
    high = ordered[-1]
    with np.errstate(over='ignore', invalid='ignore'):
        middle = low + (high - low) / 2
    wide = ~np.isfinite(middle)
    if np.any(wide):
        middle = np.where(wide, low / 2 + high / 2, middle)
    return np.clip(middle, low, high)


def combine_stack(stack, rule):
    """
    Apply ``rule`` along axis 0 of ``stack``.

    Args:
        stack: array of shape (N, ...), typically (N, L) for one pattern or
            (N, P, L) for P patterns
        rule: CombinerRule valid for N

    Returns:
        np.ndarray: combined values with the leading axis removed
    """
    stack = np.asarray(stack, dtype=float)
    if stack.ndim < 1 or stack.shape[0] < 1:
        raise InvalidInputError("nothing to combine: the ensemble axis is empty")
    if not np.all(np.isfinite(stack)):
        raise InvalidInputError("classifier outputs contain NaN or infinite entries")

    n = stack.shape[0]
    lo, hi = rule.ranks(n)
    ordered = np.sort(stack, axis=0, kind='stable')

    if not rule.is_window:
        return _midrange(ordered)
    return _window_mean(ordered, lo, hi)


def combine(matrix, rule):
    """
    Combine one pattern's classifier outputs class by class.

    Args:
        matrix (PosteriorMatrix): N x L outputs
        rule (CombinerRule): rule with ranks valid for N

    Returns:
        CombinedPosterior: L combined values

    Raises:
        InvalidRuleError: if the rule's ranks exceed N
        InvalidInputError: if the matrix has non-finite entries
    """
    if not isinstance(matrix, PosteriorMatrix):
        matrix = PosteriorMatrix.from_rows(matrix)
    values = combine_stack(matrix.values, rule)
    return CombinedPosterior(values=values, rule=rule)


def decide(combined):
    """
    Pick the class with the highest combined output (lowest index on ties).

    Raises:
        InvalidInputError: if the combined vector is empty, has fewer than two
            classes, or holds non-finite values
    """
    values = np.asarray(combined.values, dtype=float)
    if values.size == 0:
        raise InvalidInputError("cannot decide on an empty combined vector")
    if values.ndim != 1 or values.size < 2:
        raise InvalidInputError(f"combined vector needs at least 2 classes, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("combined vector contains NaN or infinite entries")
    return ClassDecision(class_index=int(np.argmax(values)), combined=combined)


def decide_batch(combined_values):
    """Row-wise argmax of a (P, L) array; ties go to the lowest class index."""
    return np.argmax(np.asarray(combined_values), axis=-1)
