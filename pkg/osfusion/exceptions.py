# osfusion/exceptions.py
"""Error types raised by the osfusion library."""


class OSFusionError(Exception):
    """Base class for every error raised by osfusion."""


class InvalidRuleError(OSFusionError, ValueError):
    """A combiner rule is malformed or its ranks do not fit the ensemble size."""


class InvalidInputError(OSFusionError, ValueError):
    """Input values are unusable (wrong shape, non-finite, empty)."""


class InvalidKeyError(OSFusionError, ValueError):
    """An order-statistic key has ranks outside 1 <= k <= l <= n."""


class NumericFailureError(OSFusionError):
    """
    A quadrature did not reach its tolerance.

    Attributes:
        key: the moment key being computed
        error_estimate: absolute error estimate reported by the integrator
    """

    def __init__(self, message, key=None, error_estimate=None):
        super().__init__(message)
        self.key = key
        self.error_estimate = error_estimate


class TableCoverageError(OSFusionError, LookupError):
    """A moment table has no entry for the requested key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class DatasetError(OSFusionError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptySplitError(OSFusionError, ValueError):
    """A train/validation/test partition would be empty."""


class TrainingFailureError(OSFusionError):
    """Network training diverged (non-finite loss)."""

    def __init__(self, message, epoch=None, loss=None):
        super().__init__(message)
        self.epoch = epoch
        self.loss = loss
