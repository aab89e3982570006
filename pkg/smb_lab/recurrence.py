"""Recurrence times ``R_n(x) = min{k >= 1: x_k..x_(k+n-1) = x_0..x_(n-1)}``.

Matches may overlap the prefix (``k < n`` is allowed). The search is a rolling
hash over the scan window with every hash hit verified symbol by symbol;
`naive_recurrence_time` rescans each shift and serves as the oracle.

.. code-block:: python

    from smb_lab import recurrence

    recurrence.recurrence_time([0, 1, 0, 1, 0, 1], n=3)  # 2

    report = recurrence.recurrence_experiment(spec, n=24, samples=1000, seed=5)
    report.median_rate  # close to the entropy rate
"""
from dataclasses import dataclass
import logging
import math

import numpy as np

from . import exceptions
from ._kernels import as_symbols, find_window
from .constants import DEFAULT_SCAN_LIMIT, MAX_NOT_FOUND_RATE
from .cylinders import entropy_rate
from .parallel import derive_seed, map_paths
from .process import cylinder_measure, iter_symbols, sample_trajectory

__all__ = (
    'RecurrenceReport',
    'recurrence_time',
    'naive_recurrence_time',
    'stream_recurrence_time',
    'recurrence_experiment',
)

logger = logging.getLogger(__name__)


def _prepare(trajectory, n):
    symbols = as_symbols(getattr(trajectory, 'symbols', trajectory))
    if n < 1 or n > len(symbols):
        raise exceptions.InvalidLength(
            'prefix length must lie in [1, {}], got {}'.format(len(symbols), n))
    return symbols


def recurrence_time(trajectory, n: int, scan_limit: int = DEFAULT_SCAN_LIMIT) -> int:
    """First shift ``k`` in ``[1, scan_limit]`` at which the length-``n`` prefix recurs.

    :param trajectory: A `Trajectory` or a sequence of symbols.
    :raises NotFound: No recurrence within ``scan_limit`` shifts (or before the
        trajectory ends).
    """
    symbols = _prepare(trajectory, n)
    k = find_window(symbols, symbols[:n].copy(), 1, int(scan_limit))
    if k < 0:
        raise exceptions.NotFound(scan_limit)
    return int(k)


def naive_recurrence_time(trajectory, n: int, scan_limit: int = DEFAULT_SCAN_LIMIT) -> int:
    """`recurrence_time` by direct comparison at every shift."""
    symbols = _prepare(trajectory, n)
    prefix = symbols[:n]
    for k in range(1, min(int(scan_limit), len(symbols) - n) + 1):
        if np.array_equal(symbols[k:k + n], prefix):
            return k
    raise exceptions.NotFound(scan_limit)


def stream_recurrence_time(spec, n: int, seed: int, scan_limit: int = DEFAULT_SCAN_LIMIT,
                           chunk_size: int = 2 ** 16) -> int:
    """`recurrence_time` on the path ``sample_trajectory(spec, ., seed)`` without
    materializing it: chunks are drawn on demand and only ``n - 1`` symbols are
    carried between them.
    """
    if n < 1:
        raise exceptions.InvalidLength('prefix length must be >= 1, got {}'.format(n))
    stream = iter_symbols(spec, seed, chunk_size=max(int(chunk_size), 2 * n))
    buffer = as_symbols(next(stream))
    needle = buffer[:n].copy()
    base = 0
    start = 1
    while start <= scan_limit:
        stop = min(int(scan_limit), base + len(buffer) - n)
        if stop >= start:
            hit = find_window(buffer, needle, start - base, stop - base)
            if hit >= 0:
                return int(base + hit)
            start = stop + 1
        tail = buffer[len(buffer) - n + 1:]
        base += len(buffer) - len(tail)
        buffer = as_symbols(np.concatenate([tail, next(stream)]))
    raise exceptions.NotFound(scan_limit)


@dataclass(frozen=True)
class RecurrenceReport:
    """Recurrence times over independent paths.

    ``rows`` holds ``(path, R_n, log(R_n)/n, log R_n - I_n)``; the last three
    are None for paths whose search ran out of window.
    """
    n: int
    samples: int
    scan_limit: int
    h: float
    rows: tuple

    @property
    def found(self):
        return [row for row in self.rows if row[1] is not None]

    @property
    def not_found_rate(self):
        return 1.0 - len(self.found) / self.samples

    @property
    def median_rate(self):
        return float(np.median([row[2] for row in self.found]))

    @property
    def median_relative_error(self):
        """``|median((log R_n)/n) - h| / h``."""
        return abs(self.median_rate - self.h) / self.h

    @property
    def p90_correction(self):
        """90th percentile of ``|log R_n - I_n| / n``."""
        return float(np.quantile([abs(row[3]) / self.n for row in self.found], 0.9))


def _recurrence_sample(task):
    spec, n, seed, scan_limit = task
    prefix = sample_trajectory(spec, n, seed).word()
    information = cylinder_measure(spec, prefix).information
    try:
        k = stream_recurrence_time(spec, n, seed, scan_limit)
    except exceptions.NotFound:
        logger.warning('No recurrence within %d shifts (seed %d)', scan_limit, seed)
        return None, None, None
    return k, math.log(k) / n, math.log(k) - information


def recurrence_experiment(spec, n: int, samples: int, seed: int,
                          scan_limit: int = DEFAULT_SCAN_LIMIT, workers=None) -> RecurrenceReport:
    """Distribution of ``(log R_n)/n`` and ``log(R_n mu(A_n)) = log R_n - I_n``.

    :raises NotFoundRateExceeded: More than 1% of the searches ran out of window.
    """
    if samples < 1:
        raise exceptions.InvalidSampleSize('samples must be >= 1')
    tasks = [(spec, int(n), derive_seed(seed, i), int(scan_limit)) for i in range(samples)]
    logger.info('Recurrence experiment: n=%d, %d paths', n, samples)
    results = map_paths(_recurrence_sample, tasks, workers)
    rows = tuple((index,) + result for index, result in enumerate(results))
    report = RecurrenceReport(int(n), int(samples), int(scan_limit), entropy_rate(spec), rows)
    if report.not_found_rate > MAX_NOT_FOUND_RATE:
        raise exceptions.NotFoundRateExceeded(
            '{:.1%} of recurrence searches ran out of window'.format(report.not_found_rate))
    return report
