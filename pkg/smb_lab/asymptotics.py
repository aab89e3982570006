"""Monte Carlo and single-path experiments on the information function
``I_n(x) = -log mu(A_n(x))``.

.. code-block:: python

    from smb_lab import asymptotics, process

    path = process.sample_trajectory(spec, length=10 ** 6, seed=1)
    stats = asymptotics.information_path(spec, path, n_grid=[10 ** 3, 10 ** 6])
    stats.I_values[-1] / 10 ** 6  # close to the entropy rate

    report = asymptotics.clt_experiment(spec, n=2000, samples=20000, seed=7)
    report.ks_distance

Experiments take ``h`` and ``sigma`` from the closed forms in
`smb_lab.cylinders`, never from the sample being standardized. Path ``i`` of an
experiment is seeded with ``derive_seed(seed, i)``, so results do not depend on
the number of workers.
"""
from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import stats

from . import exceptions
from .constants import DEFAULT_BUDGET, MIN_CLT_SAMPLES
from .cylinders import (
    centered_moment_M,
    closed_join_entropy,
    entropy_rate,
    fsum,
    variance_formula,
)
from .parallel import derive_seed, map_paths
from .process import log_factors, sample_trajectory

__all__ = (
    'PathStats',
    'CltReport',
    'MomentGrowthReport',
    'BlockSchedule',
    'information_path',
    'segment_information',
    'information_samples',
    'smb_experiment',
    'lil_diagnostic',
    'clt_experiment',
    'moment_growth_experiment',
    'block_schedule',
    'block_counts',
    'partition_identity_holds',
    'schedule_growth_exponent',
    'block_decomposition_error',
    'block_error_experiment',
)

logger = logging.getLogger(__name__)

#: Variances below this are treated as zero.
DEGENERATE_VARIANCE = 1e-14


# ##### Single paths #####

@dataclass(frozen=True)
class PathStats:
    """Information ``I_n`` along one path at each ``n`` of ``n_grid``."""
    n_grid: tuple
    I_values: tuple
    seed: int = None
    R_values: tuple = None

    def __post_init__(self):
        if any(value < 0 for value in self.I_values):
            raise ValueError('information must be nonnegative')
        if any(later < earlier for earlier, later in zip(self.I_values, self.I_values[1:])):
            raise ValueError('information must not decrease along a path')


def _check_grid(n_grid, length):
    n_grid = tuple(int(n) for n in n_grid)
    if not n_grid or n_grid[0] < 1 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise exceptions.InvalidOrder('n_grid must be increasing positive integers')
    if n_grid[-1] > length:
        raise exceptions.GridExceedsTrajectory(
            'order {} exceeds trajectory length {}'.format(n_grid[-1], length))
    return n_grid


def information_path(spec, trajectory, n_grid) -> PathStats:
    """``I_n`` for every ``n`` in ``n_grid`` from one running sum of log factors.

    Each value is bitwise equal to ``-cylinder_measure(spec, prefix)``.

    :raises GridExceedsTrajectory: ``max(n_grid) > len(trajectory)``.
    """
    n_grid = _check_grid(n_grid, len(trajectory))
    running = np.cumsum(log_factors(spec, trajectory.symbols[:n_grid[-1]]))
    values = tuple(float(-running[n - 1]) for n in n_grid)
    return PathStats(n_grid, values, trajectory.seed)


def segment_information(spec, symbols, starts, lengths):
    """Information of the words ``symbols[s:s + l]`` for each ``(s, l)``, vectorized
    through prefix sums.
    """
    symbols = np.asarray(symbols)
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    if spec.kind == 'bernoulli':
        prefix = np.concatenate([[0.0], np.cumsum(spec.log_stationary[symbols])])
        return -(prefix[starts + lengths] - prefix[starts])
    steps = spec.log_transition[symbols[:-1], symbols[1:]]
    prefix = np.concatenate([[0.0], np.cumsum(steps)])
    heads = spec.log_stationary[symbols[starts]]
    return -(heads + (prefix[starts + lengths - 1] - prefix[starts]))


def _default_grid(length):
    grid = [10 ** e for e in range(1, int(math.log10(length)) + 1) if 10 ** e < length]
    return tuple(grid + [length])


def _smb_path(task):
    spec, length, n_grid, seed = task
    return information_path(spec, sample_trajectory(spec, length, seed), n_grid)


def smb_experiment(spec, length: int, paths: int, seed: int, n_grid=None, workers=None):
    """``|I_n/n - h|`` along ``paths`` independent paths.

    Returns rows ``(path, n, I_n, I_n/n, abs_error)``.
    """
    n_grid = _check_grid(n_grid or _default_grid(length), length)
    h = entropy_rate(spec)
    tasks = [(spec, length, n_grid, derive_seed(seed, i)) for i in range(paths)]
    rows = []
    for index, path in enumerate(map_paths(_smb_path, tasks, workers)):
        for n, value in zip(path.n_grid, path.I_values):
            rows.append((index, n, value, value / n, abs(value / n - h)))
    return rows


def _sigma(spec):
    sigma2 = variance_formula(spec)
    if sigma2 < DEGENERATE_VARIANCE:
        raise exceptions.DegenerateVariance('limiting variance is {!r}'.format(sigma2))
    return math.sqrt(sigma2)


def lil_diagnostic(spec, trajectory, sigma=None, n_min: int = 16) -> float:
    """``max_n |J_n| / (sigma sqrt(2 n log log n))`` over ``n_min <= n <= len(path)``,
    with ``J_n = I_n - H(A^n)``. Reported as a trend only.
    """
    sigma = _sigma(spec) if sigma is None else sigma
    n = np.arange(1, len(trajectory) + 1, dtype=np.float64)
    information = -np.cumsum(log_factors(spec, trajectory.symbols))
    h = entropy_rate(spec)
    head = closed_join_entropy(spec, 1) - h
    centered = information - (head + n * h)
    window = n >= max(n_min, 3)
    scale = sigma * np.sqrt(2 * n[window] * np.log(np.log(n[window])))
    return float(np.max(np.abs(centered[window]) / scale))


# ##### CLT #####

@dataclass(frozen=True)
class CltReport:
    """Summary of ``(I_n - n h) / (sigma sqrt(n))`` over independent paths."""
    n: int
    samples: int
    mean: float
    variance: float
    skew: float
    ks_distance: float
    h_used: float
    sigma_used: float

    def __post_init__(self):
        if not 0.0 <= self.ks_distance <= 1.0:
            raise ValueError('KS distance must lie in [0, 1]')
        if self.samples < MIN_CLT_SAMPLES:
            raise ValueError('a CLT report needs at least {} samples'.format(MIN_CLT_SAMPLES))


def _path_information(task):
    spec, n, seed = task
    trajectory = sample_trajectory(spec, n, seed)
    return float(-np.cumsum(log_factors(spec, trajectory.symbols))[-1])


def information_samples(spec, n: int, samples: int, seed: int, workers=None):
    """``I_n`` on ``samples`` independent paths, in path order."""
    tasks = [(spec, n, derive_seed(seed, i)) for i in range(samples)]
    return np.array(map_paths(_path_information, tasks, workers))


def clt_experiment(spec, n: int, samples: int, seed: int, workers=None) -> CltReport:
    """Standardize ``I_n`` over independent paths and measure its Kolmogorov-Smirnov
    distance to the standard normal.

    :raises InvalidSampleSize: ``samples < 100``.
    :raises DegenerateVariance: ``sigma = 0``.
    """
    if samples < MIN_CLT_SAMPLES:
        raise exceptions.InvalidSampleSize(
            'need at least {} samples, got {}'.format(MIN_CLT_SAMPLES, samples))
    sigma = _sigma(spec)
    h = entropy_rate(spec)
    logger.info('CLT experiment: n=%d, %d paths', n, samples)
    values = information_samples(spec, n, samples, seed, workers)
    standardized = np.sort((values - n * h) / (sigma * math.sqrt(n)))
    mean = fsum(standardized) / samples
    variance = fsum((standardized - mean) ** 2) / (samples - 1)
    ks = stats.kstest(standardized, 'norm').statistic
    return CltReport(
        n=int(n), samples=int(samples), mean=mean, variance=variance,
        skew=float(stats.skew(standardized)), ks_distance=float(ks),
        h_used=h, sigma_used=sigma,
    )


# ##### Moment growth #####

@dataclass(frozen=True)
class MomentGrowthReport:
    """``M_q(A^n) / n^(q/2)`` along ``n_grid``."""
    q: float
    n_grid: tuple
    moments: tuple
    ratios: tuple
    method: str

    @property
    def max_min_ratio(self):
        return max(self.ratios) / min(self.ratios)


def moment_growth_experiment(spec, q: float, n_grid, method: str = 'exact', samples: int = 2000,
                             seed: int = 0, budget: int = DEFAULT_BUDGET,
                             workers=None) -> MomentGrowthReport:
    """Track the growth of the centered moments ``M_q(A^n)``.

    :param method: ``'exact'`` enumerates the cylinders; ``'monte_carlo'`` averages
        ``|I_n - H(A^n)|^q`` over ``samples`` paths.
    """
    n_grid = tuple(int(n) for n in n_grid)
    if method == 'exact':
        moments = tuple(centered_moment_M(spec, n, q, budget) for n in n_grid)
    elif method == 'monte_carlo':
        moments = []
        for index, n in enumerate(n_grid):
            values = information_samples(spec, n, samples, derive_seed(seed, index), workers)
            centered = np.abs(values - closed_join_entropy(spec, n)) ** q
            moments.append(fsum(centered) / samples)
        moments = tuple(moments)
    else:
        raise ValueError('unknown moment method {!r}'.format(method))
    ratios = tuple(moment / n ** (q / 2) for moment, n in zip(moments, n_grid))
    return MomentGrowthReport(float(q), n_grid, moments, ratios, method)


# ##### Block / gap decomposition #####

@dataclass(frozen=True)
class BlockSchedule:
    """Split of ``[0, n_total)`` into blocks of length ``n_j = floor(sqrt(j))``, each
    followed by a gap ``floor(n_j^alpha)``, and a remainder.

    ``blocks`` holds ``(n_j, gap_j, N_j)`` with ``N_j`` the start of block ``j``.
    """
    alpha: float
    n_total: int
    Q: int
    blocks: tuple
    remainder: int

    @property
    def starts(self):
        return np.array([start for _, _, start in self.blocks], dtype=np.int64)

    @property
    def lengths(self):
        return np.array([length for length, _, _ in self.blocks], dtype=np.int64)

    @property
    def gaps(self):
        return np.array([gap for _, gap, _ in self.blocks], dtype=np.int64)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise exceptions.InvalidAlpha('alpha must lie in (0, 1), got {!r}'.format(alpha))


def _block_lengths(count, alpha):
    j = np.arange(1, count + 1, dtype=np.int64)
    root = np.floor(np.sqrt(j)).astype(np.int64)
    root[(root + 1) ** 2 <= j] += 1
    root[root ** 2 > j] -= 1
    gaps = np.floor(np.power(root.astype(np.float64), alpha)).astype(np.int64)
    return root, gaps


def _schedule_table(n_max, alpha):
    count = int((1.5 * n_max) ** (2.0 / 3.0)) + 16
    while True:
        lengths, gaps = _block_lengths(count, alpha)
        ends = np.cumsum(lengths + gaps)
        if ends[-1] > n_max:
            return lengths, gaps, ends
        count *= 2


def block_schedule(n_total: int, alpha: float) -> BlockSchedule:
    """The block/gap schedule of ``[0, n_total)``; ``Q`` is the number of complete
    block+gap pairs that fit.

    :raises InvalidAlpha: ``alpha`` outside ``(0, 1)``.
    """
    _check_alpha(alpha)
    if n_total < 4:
        raise exceptions.InvalidLength('n_total must be >= 4, got {}'.format(n_total))
    lengths, gaps, ends = _schedule_table(n_total, alpha)
    Q = int(np.searchsorted(ends, n_total, side='right'))
    starts = np.concatenate([[0], ends[:-1]])
    blocks = tuple(zip(lengths[:Q].tolist(), gaps[:Q].tolist(), starts[:Q].tolist()))
    return BlockSchedule(float(alpha), int(n_total), Q, blocks, int(n_total - ends[Q - 1]))


def block_counts(n_values, alpha: float):
    """``(Q, remainder)`` arrays for many totals at once."""
    _check_alpha(alpha)
    n_values = np.asarray(n_values, dtype=np.int64)
    _, _, ends = _schedule_table(int(n_values.max()), alpha)
    Q = np.searchsorted(ends, n_values, side='right')
    covered = np.where(Q > 0, ends[np.maximum(Q - 1, 0)], 0)
    return Q, n_values - covered


def partition_identity_holds(n_max: int, alpha: float, n_min: int = 4) -> bool:
    """Check, for every total in ``[n_min, n_max]``, that blocks, gaps and the
    remainder tile ``[0, n)`` and that the remainder leaves no room for another
    block+gap pair.
    """
    _check_alpha(alpha)
    n_values = np.arange(n_min, n_max + 1, dtype=np.int64)
    lengths, gaps, _ = _schedule_table(n_max, alpha)
    j = np.arange(1, len(lengths) + 1, dtype=np.int64)
    if np.any(lengths ** 2 > j) or np.any((lengths + 1) ** 2 <= j):
        return False
    pairs = lengths + gaps
    covered = np.concatenate([[0], np.cumsum(pairs)])
    Q, remainder = block_counts(n_values, alpha)
    return bool(
        np.all(covered[Q] + remainder == n_values)
        and np.all(remainder >= 0)
        and np.all(remainder < pairs[Q])
    )


def schedule_growth_exponent(n_values, alpha: float) -> float:
    """Log-log slope of ``Q`` against ``n``."""
    Q, _ = block_counts(n_values, alpha)
    slope, _ = np.polyfit(np.log(np.asarray(n_values, dtype=np.float64)), np.log(Q), 1)
    return float(slope)


def _centered_information(spec, symbols, starts, lengths, entropies):
    information = segment_information(spec, symbols, starts, lengths)
    return information - np.array([entropies[int(m)] for m in lengths])


def block_decomposition_error(spec, trajectory, n: int, alpha: float) -> float:
    """``|J_n(x) - sum_j J_(n_j)(T^(N_j) x)|`` along one path, with
    ``J_m = I_m - H(A^m)`` and exact ``H(A^m)``.

    :raises GridExceedsTrajectory: The path is shorter than ``n``.
    """
    if len(trajectory) < n:
        raise exceptions.GridExceedsTrajectory(
            'order {} exceeds trajectory length {}'.format(n, len(trajectory)))
    schedule = block_schedule(n, alpha)
    symbols = trajectory.symbols[:n]
    lengths = schedule.lengths
    entropies = {int(m): closed_join_entropy(spec, int(m)) for m in set(lengths.tolist()) | {n}}
    whole = _centered_information(spec, symbols, [0], [n], entropies)[0]
    blocks = _centered_information(spec, symbols, schedule.starts, lengths, entropies)
    return abs(whole - fsum(blocks))


def _block_errors(task):
    spec, n_values, alpha, seed = task
    trajectory = sample_trajectory(spec, max(n_values), seed)
    return [block_decomposition_error(spec, trajectory, n, alpha) for n in n_values]


def block_error_experiment(spec, n_values, alpha: float, paths: int, seed: int, workers=None):
    """Distribution of the block decomposition error over ``paths`` paths.

    Returns rows ``(n, Q, remainder, median, p90, median/n, p90/n^0.9)``.
    """
    n_values = tuple(int(n) for n in n_values)
    tasks = [(spec, n_values, alpha, derive_seed(seed, i)) for i in range(paths)]
    errors = np.array(map_paths(_block_errors, tasks, workers))
    Q, remainder = block_counts(n_values, alpha)
    rows = []
    for column, n in enumerate(n_values):
        median = float(np.median(errors[:, column]))
        p90 = float(np.quantile(errors[:, column], 0.9))
        rows.append((n, int(Q[column]), int(remainder[column]), median, p90,
                     median / n, p90 / n ** 0.9))
    return rows
