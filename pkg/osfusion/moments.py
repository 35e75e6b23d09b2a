# osfusion/moments.py
"""
Moments of standard-Gaussian order statistics.

``mu`` (means), ``alpha`` (variances) and ``b_cov`` (covariances) of the k-th
smallest of n i.i.d. N(0, 1) draws, by adaptive quadrature of the order
statistic densities, plus a seeded Monte Carlo oracle to cross-check them.

The density of the k-th of n order statistics is

    f_{k:n}(x) = n! / ((k-1)! (n-k)!) F(x)^(k-1) (1 - F(x))^(n-k) f(x)

and the joint density of ranks k < l is the usual product-of-powers form

    f_{k,l:n}(x, y) = n! / ((k-1)! (l-k-1)! (n-l)!)
                      F(x)^(k-1) (F(y) - F(x))^(l-k-1) (1 - F(y))^(n-l) f(x) f(y)

for x < y.
"""

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import NamedTuple

import numpy as np
from scipy import integrate, special

from .exceptions import InvalidInputError, InvalidKeyError, NumericFailureError, TableCoverageError

logger = logging.getLogger(__name__)

# Gaussian mass outside [-12, 12] is below 1e-30.
LOWER = -12.0
UPPER = 12.0

QUAD_EPS = 1e-10
_BREAKPOINTS = (-4.0, -2.0, 0.0, 2.0, 4.0)
QUAD_TOLERANCE = 1e-8
COV_TOLERANCE = 1e-7

MAX_TABLE_N = 32
SIGNIFICANT_DIGITS = 12
MIN_ORACLE_SAMPLES = 10_000
ORACLE_BLOCK_ROWS = 1 << 18

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# inner rule for the covariance integral: composite Gauss-Legendre on [x, UPPER]
_INNER_PANELS = 32
_gl_nodes, _gl_weights = np.polynomial.legendre.leggauss(8)
_panel_edges = np.linspace(0.0, 1.0, _INNER_PANELS + 1)
_panel_width = _panel_edges[1] - _panel_edges[0]
INNER_NODES = (
    _panel_edges[:-1, None] + (_gl_nodes[None, :] + 1.0) * _panel_width / 2.0
).ravel()
INNER_WEIGHTS = np.tile(_gl_weights * _panel_width / 2.0, _INNER_PANELS)


@dataclass(frozen=True)
class MomentKey:
    """
    Address of an order-statistic moment: rank ``k`` (and optionally ``l``) of ``n``.

    Raises:
        InvalidKeyError: unless 1 <= k <= n and, when present, k <= l <= n
    """
    n: int
    k: int
    l: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidKeyError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise InvalidKeyError(f"k must lie in [1, {self.n}], got {self.k}")
        if self.l is not None:
            if self.k > self.l:
                raise InvalidKeyError(f"covariance keys need k <= l, got k={self.k}, l={self.l}")
            if self.l > self.n:
                raise InvalidKeyError(f"l must lie in [{self.k}, {self.n}], got {self.l}")

    def mirror(self):
        """The key with every rank reflected (r -> n + 1 - r)."""
        n = self.n
        if self.l is None:
            return MomentKey(n, n + 1 - self.k)
        return MomentKey(n, n + 1 - self.l, n + 1 - self.k)

    def __str__(self):
        if self.l is None:
            return f"({self.n},{self.k})"
        return f"({self.n},{self.k},{self.l})"


def _as_key(key):
    if isinstance(key, MomentKey):
        return key
    return MomentKey(*key)


def normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def os_density(x, n, k):
    """Density of the k-th smallest of n standard normals."""
    x = np.asarray(x, dtype=float)
    coeff = n * math.comb(n - 1, k - 1)
    return coeff * special.ndtr(x) ** (k - 1) * special.ndtr(-x) ** (n - k) * normal_pdf(x)


def _joint_coefficient(n, k, l):
    return math.factorial(n) / (
        math.factorial(k - 1) * math.factorial(l - k - 1) * math.factorial(n - l)
    )


def _cdf_gap(x, y):
    """F(y) - F(x) without cancellation in either tail."""
    return np.where(
        np.asarray(x) > 0.0,
        special.ndtr(-x) - special.ndtr(-y),
        special.ndtr(y) - special.ndtr(x),
    )


def os_joint_density(x, y, n, k, l):
    """Joint density of the k-th and l-th (k < l) smallest of n standard normals."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    coeff = _joint_coefficient(n, k, l)
    gap = np.clip(_cdf_gap(x, y), 0.0, None)
    value = (
        coeff
        * special.ndtr(x) ** (k - 1)
        * gap ** (l - k - 1)
        * special.ndtr(-y) ** (n - l)
        * normal_pdf(x)
        * normal_pdf(y)
    )
    return np.where(x < y, value, 0.0)


def _quad(func, key, what, tolerance=QUAD_TOLERANCE):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', integrate.IntegrationWarning)
        value, error = integrate.quad(
            func, LOWER, UPPER, epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=400,
            points=_BREAKPOINTS,
        )
    if error > tolerance or not math.isfinite(value):
        detail = f"; {caught[0].message}" if caught else ""
        raise NumericFailureError(
            f"quadrature for the {what} of key {key} did not converge: "
            f"error estimate {error:.3g} > {tolerance:.1g}{detail}",
            key=key,
            error_estimate=error,
        )
    return value


def os_mean(key):
    """
    Mean of the k-th of n standard-Gaussian order statistics.

    Args:
        key: MomentKey or ``(n, k)`` tuple

    Raises:
        NumericFailureError: if the quadrature misses its tolerance
    """
    key = _as_key(key)
    n, k = key.n, key.k
    if 2 * k == n + 1:
        return 0.0
    return _quad(lambda x: x * os_density(x, n, k), key, 'mean')


def _second_moment(key):
    n, k = key.n, key.k
    return _quad(lambda x: x * x * os_density(x, n, k), key, 'second moment')


def os_variance(key):
    """Variance (the reduction factor alpha) of the k-th of n standard-Gaussian order statistics."""
    key = _as_key(key)
    if key.n == 1:
        return 1.0
    mean = os_mean(MomentKey(key.n, key.k))
    return _second_moment(key) - mean * mean


def _inner_tail(x, n, k, l):
    """
    Integral over y in [x, UPPER] of y f(y) (F(y) - F(x))^(l-k-1) (1 - F(y))^(n-l).
    """
    span = UPPER - x
    if span <= 0.0:
        return 0.0
    y = x + span * INNER_NODES
    gap = np.clip(_cdf_gap(x, y), 0.0, None)
    integrand = y * normal_pdf(y) * gap ** (l - k - 1) * special.ndtr(-y) ** (n - l)
    return span * float(np.dot(INNER_WEIGHTS, integrand))


def os_covariance(key):
    """
    Covariance of the k-th and l-th of n standard-Gaussian order statistics.

    The product moment is a nested integral over the joint density: adaptive
    quadrature in the outer variable, composite Gauss-Legendre in the inner
    one. ``k == l`` gives the variance.

    Args:
        key: MomentKey with ``l`` set, or an ``(n, k, l)`` tuple

    Raises:
        InvalidKeyError: if ``l`` is missing or k > l
        NumericFailureError: if the quadrature misses its tolerance
    """
    key = _as_key(key)
    if key.l is None:
        raise InvalidKeyError(f"covariance needs a second rank l, got key {key}")
    n, k, l = key.n, key.k, key.l
    if k == l:
        return os_variance(MomentKey(n, k))

    coeff = _joint_coefficient(n, k, l)

    def outer(x):
        weight = x * normal_pdf(x) * special.ndtr(x) ** (k - 1)
        if weight == 0.0:
            return 0.0
        return coeff * weight * _inner_tail(x, n, k, l)

    product = _quad(outer, key, 'product moment', tolerance=COV_TOLERANCE)
    return product - os_mean(MomentKey(n, k)) * os_mean(MomentKey(n, l))


class OracleEstimate(NamedTuple):
    estimate: float
    std_error: float


def _oracle_blocks(n, samples, seed):
    """Yield sorted (rows, n) blocks of standard normals; block b is seeded by (seed, b)."""
    remaining = samples
    block = 0
    while remaining > 0:
        rows = min(ORACLE_BLOCK_ROWS, remaining)
        rng = np.random.default_rng([seed, block])
        yield np.sort(rng.standard_normal((rows, n)), axis=1)
        remaining -= rows
        block += 1


def mc_oracle(key, samples, seed, moment=None):
    """
    Monte Carlo estimate of an order-statistic moment with its standard error.

    Args:
        key: MomentKey (or tuple); covariance requires ``l``
        samples: number of sorted n-tuples to draw (>= 10^4)
        seed: integer seed; block b of draws uses ``default_rng([seed, b])``
        moment: 'mean', 'variance' or 'covariance'; defaults to 'covariance'
            when the key has ``l`` and 'variance' otherwise

    Returns:
        OracleEstimate: (estimate, std_error)
    """
    key = _as_key(key)
    if samples < MIN_ORACLE_SAMPLES:
        raise InvalidInputError(f"mc_oracle needs at least {MIN_ORACLE_SAMPLES} samples, got {samples}")
    if seed < 0:
        raise InvalidInputError(f"seed must be >= 0, got {seed}")
    if moment is None:
        moment = 'covariance' if key.l is not None else 'variance'
    if moment not in ('mean', 'variance', 'covariance'):
        raise InvalidInputError(f"unknown moment {moment!r}")
    if moment == 'covariance' and key.l is None:
        raise InvalidKeyError(f"covariance needs a second rank l, got key {key}")

    n = key.n
    first = key.k - 1
    second = (key.l if key.l is not None else key.k) - 1

    # first pass: means
    sum_first = 0.0
    sum_second = 0.0
    for block in _oracle_blocks(n, samples, seed):
        sum_first += float(block[:, first].sum())
        sum_second += float(block[:, second].sum())
    mean_first = sum_first / samples
    mean_second = sum_second / samples

    if moment == 'mean':
        sq = 0.0
        for block in _oracle_blocks(n, samples, seed):
            sq += float(np.square(block[:, first] - mean_first).sum())
        variance = sq / (samples - 1)
        return OracleEstimate(mean_first, math.sqrt(variance / samples))

    # second pass: centred products
    sum_p = 0.0
    sum_p2 = 0.0
    for block in _oracle_blocks(n, samples, seed):
        product = (block[:, first] - mean_first) * (block[:, second] - mean_second)
        sum_p += float(product.sum())
        sum_p2 += float(np.square(product).sum())
    estimate = sum_p / (samples - 1)
    spread = max(sum_p2 / samples - (sum_p / samples) ** 2, 0.0)
    return OracleEstimate(estimate, math.sqrt(spread / samples))


def _quantize(value):
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


@dataclass(frozen=True)
class MomentTable:
    """
    Immutable table of Gaussian order-statistic moments for every n <= n_max.

    Attributes:
        n_max: largest ensemble size covered
        mu: (n, k) -> mean
        alpha: (n, k) -> variance
        b_cov: (n, k, l) -> covariance, k < l
    """
    n_max: int
    mu: MappingProxyType
    alpha: MappingProxyType
    b_cov: MappingProxyType

    def covers(self, n):
        return 1 <= n <= self.n_max

    def _require(self, n, key):
        if not self.covers(n):
            raise TableCoverageError(
                f"moment table covers n <= {self.n_max}; key {key} is missing", key=key,
            )

    def mean(self, n, k):
        self._require(n, (n, k))
        try:
            return self.mu[(n, k)]
        except KeyError:
            raise TableCoverageError(f"no mean for key ({n},{k})", key=(n, k)) from None

    def variance(self, n, k):
        self._require(n, (n, k))
        try:
            return self.alpha[(n, k)]
        except KeyError:
            raise TableCoverageError(f"no variance for key ({n},{k})", key=(n, k)) from None

    def covariance(self, n, k, l):
        if k == l:
            return self.variance(n, k)
        self._require(n, (n, k, l))
        try:
            return self.b_cov[(n, k, l)]
        except KeyError:
            raise TableCoverageError(f"no covariance for key ({n},{k},{l})", key=(n, k, l)) from None

    def sum_rule_residual(self, n):
        """sum(alpha) + 2 sum(B) - n; zero for an exact table."""
        total = sum(self.variance(n, k) for k in range(1, n + 1))
        total += 2.0 * sum(
            self.covariance(n, k, l) for k in range(1, n + 1) for l in range(k + 1, n + 1)
        )
        return total - n

    def restricted(self, n_max):
        """The sub-table for n <= n_max."""
        if not self.covers(n_max):
            raise TableCoverageError(
                f"moment table covers n <= {self.n_max}, cannot restrict to {n_max}", key=(n_max,),
            )
        return _make_table(
            n_max,
            {key: v for key, v in self.mu.items() if key[0] <= n_max},
            {key: v for key, v in self.alpha.items() if key[0] <= n_max},
            {key: v for key, v in self.b_cov.items() if key[0] <= n_max},
        )

    def lines(self):
        """Cache-format lines: section headers then ``n k [l] value`` entries."""
        yield '# mu'
        for (n, k), value in sorted(self.mu.items()):
            yield f"{n} {k} {value:.{SIGNIFICANT_DIGITS}g}"
        yield '# alpha'
        for (n, k), value in sorted(self.alpha.items()):
            yield f"{n} {k} {value:.{SIGNIFICANT_DIGITS}g}"
        yield '# b_cov'
        for (n, k, l), value in sorted(self.b_cov.items()):
            yield f"{n} {k} {l} {value:.{SIGNIFICANT_DIGITS}g}"


def _make_table(n_max, mu, alpha, b_cov):
    return MomentTable(
        n_max=n_max,
        mu=MappingProxyType(dict(mu)),
        alpha=MappingProxyType(dict(alpha)),
        b_cov=MappingProxyType(dict(b_cov)),
    )


def _canonical(key):
    """Pick one representative of a key and its mirror image."""
    mirror = key.mirror()
    if (mirror.k, mirror.l or 0) < (key.k, key.l or 0):
        return mirror
    return key


def _compute(task):
    kind, key = task
    if kind == 'mu':
        return os_mean(key)
    if kind == 'alpha':
        return os_variance(key)
    return os_covariance(key)


def _table_tasks(n_max):
    tasks = []
    for n in range(2, n_max + 1):
        for k in range(1, n + 1):
            key = MomentKey(n, k)
            if _canonical(key) == key:
                tasks.append(('mu', key))
                tasks.append(('alpha', key))
        for k in range(1, n + 1):
            for l in range(k + 1, n + 1):
                key = MomentKey(n, k, l)
                if _canonical(key) == key:
                    tasks.append(('b_cov', key))
    return tasks


def build_table(n_max, workers=1):
    """
    Compute means, variances and covariances for every key with n <= n_max.

    Only one key of each mirror pair (r -> n + 1 - r) is integrated; the other
    is filled in by Gaussian symmetry. Values are rounded to 12 significant
    digits so a table written to the cache reloads bit-identically.

    Args:
        n_max: largest ensemble size, 1..32
        workers: size of the process pool (1 computes in-process)

    Raises:
        InvalidInputError: if n_max is out of range
        NumericFailureError: naming the key whose quadrature failed
    """
    if not 1 <= n_max <= MAX_TABLE_N:
        raise InvalidInputError(f"n_max must lie in [1, {MAX_TABLE_N}], got {n_max}")

    tasks = _table_tasks(n_max)
    logger.info("building moment table for n <= %d (%d integrals, %d workers)",
                n_max, len(tasks), workers)

    if workers > 1 and tasks:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_compute, tasks, chunksize=8))
    else:
        values = [_compute(task) for task in tasks]

    mu = {(1, 1): 0.0}
    alpha = {(1, 1): 1.0}
    b_cov = {}
    for (kind, key), value in zip(tasks, values):
        value = _quantize(value)
        mirror = key.mirror()
        if kind == 'mu':
            mu[(key.n, key.k)] = value
            mu[(mirror.n, mirror.k)] = 0.0 - value if mirror != key else value
        elif kind == 'alpha':
            alpha[(key.n, key.k)] = value
            alpha[(mirror.n, mirror.k)] = value
        else:
            b_cov[(key.n, key.k, key.l)] = value
            b_cov[(mirror.n, mirror.k, mirror.l)] = value

    table = _make_table(n_max, mu, alpha, b_cov)
    for n in range(1, n_max + 1):
        logger.debug("n=%d sum-rule residual %.3g", n, table.sum_rule_residual(n))
    return table


def save_table(table, path):
    """Write ``table`` in the plain-text cache format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('\n'.join(table.lines()) + '\n', encoding='utf-8')
    logger.info("moment table (n <= %d) written to %s", table.n_max, path)


def load_table(path):
    """
    Read a table written by ``save_table``.

    Raises:
        InvalidInputError: on a malformed line (the message names the line)
        TableCoverageError: if some key for n <= n_max is missing
    """
    path = Path(path)
    sections = {'mu': {}, 'alpha': {}, 'b_cov': {}}
    current = None
    for lineno, raw in enumerate(path.read_text(encoding='utf-8').splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            name = line[1:].strip()
            if name not in sections:
                raise InvalidInputError(f"{path}:{lineno}: unknown section {name!r}")
            current = name
            continue
        if current is None:
            raise InvalidInputError(f"{path}:{lineno}: entry before any section header")
        parts = line.split()
        expected = 4 if current == 'b_cov' else 3
        if len(parts) != expected:
            raise InvalidInputError(
                f"{path}:{lineno}: expected {expected} fields in section {current}, got {len(parts)}"
            )
        try:
            ranks = tuple(int(part) for part in parts[:-1])
            value = float(parts[-1])
        except ValueError as exc:
            raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
        sections[current][ranks] = value

    if not sections['alpha']:
        raise InvalidInputError(f"{path}: no alpha entries")
    n_max = max(n for n, _ in sections['alpha'])
    for n in range(1, n_max + 1):
        for k in range(1, n + 1):
            for name in ('mu', 'alpha'):
                if (n, k) not in sections[name]:
                    raise TableCoverageError(f"{path}: missing {name} entry ({n},{k})", key=(n, k))
            for l in range(k + 1, n + 1):
                if (n, k, l) not in sections['b_cov']:
                    raise TableCoverageError(f"{path}: missing b_cov entry ({n},{k},{l})", key=(n, k, l))
    return _make_table(n_max, sections['mu'], sections['alpha'], sections['b_cov'])


def get_table(n_max, cache_path=None, workers=1):
    """
    Return a table covering ``n_max``, reusing the cache file when it is large enough.

    A missing or too-small cache is rebuilt and rewritten.
    """
    if cache_path is not None:
        cache_path = Path(cache_path)
        if cache_path.exists():
            try:
                table = load_table(cache_path)
            except (InvalidInputError, TableCoverageError) as exc:
                logger.warning("ignoring unreadable moment cache %s: %s", cache_path, exc)
            else:
                if table.n_max >= n_max:
                    logger.debug("moment table loaded from %s (n <= %d)", cache_path, table.n_max)
                    return table
                n_max = max(n_max, table.n_max)

    table = build_table(n_max, workers=workers)
    if cache_path is not None:
        save_table(table, cache_path)
    return table
