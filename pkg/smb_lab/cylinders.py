"""Exact statistics of the joins ``A^n``: entropy, the moment scales ``K_w`` and
``M_l``, finite-n variance, conditional quantities and the limiting variance.

Every function here enumerates cylinders exactly. The enumeration expands the
prefix tree one level at a time and drops zero-measure prefixes as soon as they
appear, so forbidden transitions prune whole subtrees.

.. code-block:: python

    from smb_lab import cylinders, process

    spec = process.validate_spec({'type': 'bernoulli', 'weights': [0.25, 0.75]})
    cylinders.entropy_rate(spec)          # 0.5623351446188083
    cylinders.join_entropy(spec, n=5)     # 5 * entropy_rate
    cylinders.limit_variance(spec).sigma2_limit

All sums are compensated (`math.fsum`), and the enumeration order is fixed, so
results do not depend on how the work is scheduled.
"""
from dataclasses import dataclass, field
from itertools import chain
import logging
import math

import numpy as np
from scipy import special

from . import exceptions
from .constants import (
    DEFAULT_BUDGET,
    EXTRAPOLATION_POINTS,
    RATE_FIT_MIN_N,
    SERIES_CAP,
    SERIES_CUTOFF,
)

__all__ = (
    'CylinderTable',
    'PairTable',
    'MomentRow',
    'MomentTable',
    'VarianceReport',
    'SubadditivityReport',
    'enumerate_cylinders',
    'enumerate_pairs',
    'entropy_rate',
    'closed_join_entropy',
    'join_entropy',
    'moment_K',
    'centered_moment_M',
    'conditional_K',
    'moment_table',
    'limit_variance',
    'variance_formula',
    'subadditivity_check',
    'k_growth_ratios',
    'conditional_prob_gap',
    'entropy_approximation_gap',
    'max_cylinder_measure',
    'small_atom_convention',
    'eta',
    'fsum',
)

logger = logging.getLogger(__name__)


def fsum(values, chunk=2 ** 20):
    """Compensated sum of an array of any shape, streamed in chunks."""
    values = np.asarray(values, dtype=np.float64).ravel()
    return math.fsum(chain.from_iterable(
        values[start:start + chunk].tolist() for start in range(0, len(values), chunk)))


def eta(log_measure, w):
    """``t |log t|^w`` evaluated from ``log t``; zero-measure entries give 0."""
    log_measure = np.asarray(log_measure, dtype=np.float64)
    finite = np.isfinite(log_measure)
    out = np.zeros_like(log_measure)
    out[finite] = np.exp(log_measure[finite]) * np.power(-log_measure[finite], w)
    return out


# ##### Enumeration #####

@dataclass(frozen=True, eq=False)
class CylinderTable:
    """All positive-measure n-cylinders, in lexicographic order.

    ``first`` and ``last`` hold the first and last symbol of each cylinder.
    """
    n: int
    log_measure: np.ndarray
    first: np.ndarray
    last: np.ndarray

    def __len__(self):
        return len(self.log_measure)

    @property
    def measure(self):
        return np.exp(self.log_measure)


@dataclass(frozen=True, eq=False)
class PairTable:
    """Joint log-measures of ``B ∈ A^n`` and ``C ∈ T^(-gap-n) A^m``.

    ``log_joint[b, c]`` may be ``-inf``; the row and column tables only hold
    positive-measure cylinders.
    """
    left: CylinderTable
    right: CylinderTable
    gap: int
    log_joint: np.ndarray

    @property
    def log_product(self):
        return self.left.log_measure[:, None] + self.right.log_measure[None, :]

    @property
    def joint(self):
        return np.exp(self.log_joint)

    @property
    def product(self):
        return np.exp(self.log_product)


def _check_order(n, name='n'):
    if int(n) != n or n < 1:
        raise exceptions.InvalidOrder('{} must be a positive integer, got {!r}'.format(name, n))


def enumerate_cylinders(spec, n: int, budget: int = DEFAULT_BUDGET) -> CylinderTable:
    """Enumerate the positive-measure n-cylinders of ``spec``.

    :raises InvalidOrder: ``n < 1``.
    :raises BudgetExceeded: A level of the prefix tree has more than ``budget``
        candidate children.
    """
    _check_order(n)
    k = spec.size
    symbols = np.arange(k)
    keep = np.isfinite(spec.log_stationary)
    log_measure = spec.log_stationary[keep]
    first = symbols[keep]
    last = first
    for _ in range(1, n):
        candidates = len(log_measure) * k
        if candidates > budget:
            raise exceptions.BudgetExceeded(candidates, budget)
        children = (log_measure[:, None] + spec.log_transition[last]).ravel()
        first = np.repeat(first, k)
        last = np.tile(symbols, len(log_measure))
        keep = np.isfinite(children)
        log_measure, first, last = children[keep], first[keep], last[keep]
    if len(log_measure) > budget:
        raise exceptions.BudgetExceeded(len(log_measure), budget)
    logger.debug('Enumerated %d cylinders of order %d', len(log_measure), n)
    return CylinderTable(int(n), log_measure, first, last)


def enumerate_pairs(spec, n: int, m: int, gap: int, budget: int = DEFAULT_BUDGET) -> PairTable:
    """Joint measures of all cylinder pairs ``(B, C)`` with ``C`` starting ``gap``
    symbols after ``B`` ends. Evaluated in the same order as
    `smb_lab.process.shift_concat_measure`.

    :raises InvalidGap: ``gap < 0``.
    :raises BudgetExceeded: More than ``budget`` pairs.
    """
    if gap < 0:
        raise exceptions.InvalidGap('gap must be >= 0, got {}'.format(gap))
    left = enumerate_cylinders(spec, n, budget)
    right = enumerate_cylinders(spec, m, budget)
    pairs = len(left) * len(right)
    if pairs > budget:
        raise exceptions.BudgetExceeded(pairs, budget)
    if spec.kind == 'bernoulli':
        log_joint = left.log_measure[:, None] + right.log_measure[None, :]
    else:
        bridge = spec.log_power(gap + 1)[left.last[:, None], right.first[None, :]]
        log_joint = (left.log_measure[:, None] + bridge) + right.log_measure[None, :]
        log_joint = np.minimum(log_joint - spec.log_stationary[right.first][None, :], 0.0)
    return PairTable(left, right, int(gap), log_joint)


# ##### Entropy and moments #####

def entropy_rate(spec) -> float:
    """Exact entropy rate in nats.

    Bernoulli: ``sum_j p_j |log p_j|``. Markov: ``sum_ij -p_i P_ij log P_ij``.
    """
    if spec.kind == 'bernoulli':
        return fsum(special.entr(spec.weights))
    return fsum(spec.stationary[:, None] * special.entr(spec.transition))


def closed_join_entropy(spec, n: int) -> float:
    """``H(A^n)`` in closed form: ``n h`` for Bernoulli, ``H(p) + (n-1) h`` for Markov."""
    _check_order(n)
    h = entropy_rate(spec)
    if spec.kind == 'bernoulli':
        return n * h
    return fsum(special.entr(spec.stationary)) + (n - 1) * h


def join_entropy(spec, n: int, budget: int = DEFAULT_BUDGET) -> float:
    """``H(A^n)`` by enumeration."""
    return moment_K(spec, n, 1, budget)


def moment_K(spec, n: int, w: float, budget: int = DEFAULT_BUDGET) -> float:
    """``K_w(A^n) = sum_A mu(A) |log mu(A)|^w``; ``w`` need not be an integer.

    :raises InvalidExponent: ``w < 0``.
    """
    if w < 0:
        raise exceptions.InvalidExponent('w must be >= 0, got {!r}'.format(w))
    table = enumerate_cylinders(spec, n, budget)
    return fsum(eta(table.log_measure, w))


def _centered_moment(table, entropy, ell):
    centered = -table.log_measure - entropy
    return fsum(table.measure * np.power(np.abs(centered), ell))


def centered_moment_M(spec, n: int, ell: float, budget: int = DEFAULT_BUDGET) -> float:
    """``M_l(A^n) = sum_B mu(B) |J(B)|^l`` with ``J(B) = -log mu(B) - H(A^n)``.

    :raises InvalidExponent: ``ell < 1``.
    """
    if ell < 1:
        raise exceptions.InvalidExponent('ell must be >= 1, got {!r}'.format(ell))
    table = enumerate_cylinders(spec, n, budget)
    entropy = fsum(eta(table.log_measure, 1))
    return _centered_moment(table, entropy, ell)


def _conditional_K(pairs, w):
    finite = np.isfinite(pairs.log_joint)
    log_joint = pairs.log_joint[finite]
    conditional = log_joint - np.broadcast_to(pairs.left.log_measure[:, None],
                                              pairs.log_joint.shape)[finite]
    return fsum(np.exp(log_joint) * np.power(np.abs(conditional), w))


def conditional_K(spec, n: int, m: int, gap: int, w: float,
                  budget: int = DEFAULT_BUDGET) -> float:
    """``K_w(C|B) = sum_(B,C) mu(B∩C) |log(mu(B∩C)/mu(B))|^w`` for ``B = A^n`` and
    ``C = T^(-gap-n) A^m``.
    """
    if w < 0:
        raise exceptions.InvalidExponent('w must be >= 0, got {!r}'.format(w))
    return _conditional_K(enumerate_pairs(spec, n, m, gap, budget), w)


@dataclass(frozen=True)
class MomentRow:
    n: int
    H_n: float
    K: dict
    M: dict
    var_n: float


@dataclass(frozen=True)
class MomentTable:
    """Per-order moments. ``K[1]`` is ``H_n`` and ``M[2]`` is ``var_n`` by construction."""
    rows: tuple

    #: Columns written to CSV.
    columns = ('n', 'H_n', 'K2', 'K4', 'M2', 'M4', 'var_n')

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def as_rows(self):
        return [
            (row.n, row.H_n, row.K.get(2), row.K.get(4), row.M.get(2), row.M.get(4), row.var_n)
            for row in self.rows
        ]


def moment_table(spec, n_values, w_values=(1, 2, 4), ell_values=(2, 4),
                 budget: int = DEFAULT_BUDGET) -> MomentTable:
    """`MomentTable` for every ``n`` in ``n_values``; each order is enumerated once."""
    w_values = sorted(set(w_values) | {1, 2})
    ell_values = sorted(set(ell_values) | {2})
    rows = []
    for n in n_values:
        table = enumerate_cylinders(spec, n, budget)
        K = {w: fsum(eta(table.log_measure, w)) for w in w_values}
        entropy = K[1]
        M = {ell: _centered_moment(table, entropy, ell) for ell in ell_values}
        rows.append(MomentRow(int(n), entropy, K, M, M[2]))
    return MomentTable(tuple(rows))


# ##### Variance #####

@dataclass(frozen=True)
class VarianceReport:
    """Limiting variance and the finite-n approximations ``var_n / n``.

    ``fitted_rate`` is the log-log slope of ``|sigma2 - var_n/n|`` against ``n``
    over the orders ``n >= 8`` (all orders when fewer than two reach 8);
    it is None when the discrepancy vanishes identically.
    """
    sigma2_limit: float
    sigma2_by_n: tuple
    n_values: tuple
    fitted_rate: float = None
    method: str = 'formula'
    extrapolated: float = None
    series_terms: int = 0

    def __post_init__(self):
        if any(value < 0 for value in self.sigma2_by_n):
            raise ValueError('finite-n variances must be nonnegative')


def _bernoulli_variance(weights):
    # 1/2 sum_ij p_i p_j log^2(p_i/p_j) is the variance of log p under p
    positive = weights[weights > 0]
    logs = np.log(positive)
    mean = fsum(positive * logs)
    return fsum(positive * (logs - mean) ** 2)


def _markov_variance(spec):
    """``Var(g) + 2 sum_(k>=1) Cov(g_0, g_k)`` for ``g = -log P_(x_0 x_1)``.

    The first term is the four-index double sum over transitions; each covariance
    is ``E[log P_(x_0 x_1) log P_(x_k x_(k+1))] - h^2``.
    """
    P, p = spec.transition, spec.stationary
    positive = P > 0
    g = np.where(positive, -spec.log_transition, 0.0)
    weights = p[:, None] * P
    h = entropy_rate(spec)
    variance = fsum(weights * g ** 2) - h ** 2
    row_means = (P * g).sum(axis=1)
    arrival = (weights * g).sum(axis=0)
    vector = row_means
    covariance = []
    for term_index in range(1, SERIES_CAP + 1):
        term = fsum(arrival * vector) - h ** 2
        covariance.append(term)
        if abs(term) < SERIES_CUTOFF:
            logger.debug('Variance series stopped after %d terms', term_index)
            return variance + 2 * math.fsum(covariance), term_index
        vector = P @ vector
    raise exceptions.SeriesNotConverged(
        'variance series term still {!r} after {} terms'.format(term, SERIES_CAP))


def _fit_rate(n_values, gaps, min_n=RATE_FIT_MIN_N):
    n_values = np.asarray(n_values, dtype=np.float64)
    gaps = np.asarray(gaps, dtype=np.float64)
    keep = gaps > 1e-12
    # small orders only enter the fit when too few large ones are available
    if np.count_nonzero(keep & (n_values >= min_n)) >= 2:
        keep &= n_values >= min_n
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(n_values[keep]), np.log(gaps[keep]), 1)
    return float(slope)


def _extrapolate(n_values, values, points=EXTRAPOLATION_POINTS):
    """Least-squares fit of ``a + b n^(-1/4)`` over the largest ``points`` orders."""
    n_values = np.asarray(n_values[-points:], dtype=np.float64)
    values = np.asarray(values[-points:], dtype=np.float64)
    design = np.column_stack([np.ones_like(n_values), n_values ** -0.25])
    (intercept, _), *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(intercept)


def _variance_formula(spec):
    if spec.kind == 'bernoulli':
        return max(_bernoulli_variance(spec.weights), 0.0), 0
    value, terms = _markov_variance(spec)
    return max(value, 0.0), terms


def variance_formula(spec) -> float:
    """Closed-form limiting variance ``sigma^2``, without any enumeration."""
    return _variance_formula(spec)[0]


def limit_variance(spec, n_max: int = 12, method: str = 'formula',
                   budget: int = DEFAULT_BUDGET) -> VarianceReport:
    """Limiting variance ``sigma^2`` of the information function.

    Bernoulli uses ``1/2 sum_ij p_i p_j log^2(p_i/p_j)``. Markov uses the double sum
    over transitions plus the covariance series, truncated at the first term
    below ``1e-14``. Alongside, ``(K_2(A^n) - H_n^2)/n`` is enumerated for
    ``n = 1..n_max`` and extrapolated with ``a + b n^(-1/4)``.

    :param method: ``'formula'`` reports the closed form as ``sigma2_limit``;
        ``'extrapolation'`` reports the fitted intercept instead.
    :raises SeriesNotConverged: The Markov series needs more than ``10^4`` terms.
    """
    if method not in ('formula', 'extrapolation'):
        raise ValueError('unknown variance method {!r}'.format(method))
    formula, terms = _variance_formula(spec)
    table = moment_table(spec, range(1, n_max + 1), w_values=(1, 2), ell_values=(2,),
                         budget=budget)
    n_values = tuple(row.n for row in table)
    by_n = tuple(max(row.var_n, 0.0) / row.n for row in table)
    extrapolated = _extrapolate(n_values, by_n) if len(n_values) >= 2 else by_n[-1]
    limit = formula if method == 'formula' else max(extrapolated, 0.0)
    rate = _fit_rate(n_values, [abs(limit - value) for value in by_n])
    return VarianceReport(limit, by_n, n_values, rate, method, extrapolated, terms)


# ##### Subadditivity #####

@dataclass(frozen=True)
class SubadditivityReport:
    """Slacks of the join inequalities for ``B = A^n``, ``C = T^(-gap-n) A^m``.

    - ``conditional``: ``K_w(C) - K_w(C|B)``
    - ``chain``: ``K_w(C|B)^(1/w) + K_w(B)^(1/w) - K_w(B∨C)^(1/w)``
    - ``join``: ``K_w(C)^(1/w) + K_w(B)^(1/w) - K_w(B∨C)^(1/w)``
    - ``variance``: ``sigma(C|B) + sigma(B) - sigma(B∨C)``

    ``convention_holds`` tells whether every atom and transition probability is at
    most ``e^(-w)``; the ``conditional`` and ``join`` inequalities rely on it.
    """
    n: int
    m: int
    gap: int
    w: float
    conditional: float
    chain: float
    join: float
    variance: float
    convention_holds: bool
    values: dict = field(default_factory=dict)

    @property
    def slacks(self):
        return (self.conditional, self.chain, self.join)

    def holds(self, tolerance=1e-10):
        """All inequalities that apply to this spec hold within ``tolerance``."""
        required = [self.chain, self.variance]
        if self.convention_holds:
            required += [self.conditional, self.join]
        return all(slack >= -tolerance for slack in required)


def small_atom_convention(spec, w):
    bound = math.exp(-w)
    return bool(spec.stationary.max() <= bound and spec.transition.max() <= bound)


def subadditivity_check(spec, n: int, m: int, gap: int, w: float,
                        budget: int = DEFAULT_BUDGET) -> SubadditivityReport:
    """Evaluate both sides of the join inequalities exactly.

    :raises InvalidExponent: ``w < 1``.
    """
    if w < 1:
        raise exceptions.InvalidExponent('w must be >= 1, got {!r}'.format(w))
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    K_B = fsum(eta(pairs.left.log_measure, w))
    K_C = fsum(eta(pairs.right.log_measure, w))
    K_joint = fsum(eta(pairs.log_joint, w))
    K_cond = _conditional_K(pairs, w)
    root = 1.0 / w

    finite = np.isfinite(pairs.log_joint)
    joint = np.exp(pairs.log_joint[finite])
    info_joint = -pairs.log_joint[finite]
    info_left = np.broadcast_to(-pairs.left.log_measure[:, None], pairs.log_joint.shape)[finite]
    info_cond = info_joint - info_left
    H_joint = fsum(joint * info_joint)
    H_left = fsum(joint * info_left)
    H_cond = fsum(joint * info_cond)
    sigma_joint = math.sqrt(fsum(joint * (info_joint - H_joint) ** 2))
    sigma_left = math.sqrt(fsum(joint * (info_left - H_left) ** 2))
    sigma_cond = math.sqrt(fsum(joint * (info_cond - H_cond) ** 2))

    return SubadditivityReport(
        n=int(n), m=int(m), gap=int(gap), w=float(w),
        conditional=K_C - K_cond,
        chain=K_cond ** root + K_B ** root - K_joint ** root,
        join=K_C ** root + K_B ** root - K_joint ** root,
        variance=sigma_cond + sigma_left - sigma_joint,
        convention_holds=small_atom_convention(spec, w),
        values={'K_B': K_B, 'K_C': K_C, 'K_joint': K_joint, 'K_conditional': K_cond},
    )


def k_growth_ratios(spec, n_values, w: float, budget: int = DEFAULT_BUDGET):
    """``K_w(A^n)^(1/w) / (n K_w(A)^(1/w))`` for each ``n``; at most 1 whenever the
    join inequality iterates.
    """
    base = moment_K(spec, 1, w, budget) ** (1.0 / w)
    return [moment_K(spec, n, w, budget) ** (1.0 / w) / (n * base) for n in n_values]


# ##### Miscellaneous exact quantities #####

def conditional_prob_gap(spec, n: int) -> float:
    """``||f - f_n||_1`` with ``f = log P(x_0 | past)`` and ``f_n`` its n-step
    approximation.

    Bernoulli is memoryless (0 for all ``n >= 0``); a Markov chain has one step of
    memory (0 for ``n >= 1``). For a Markov chain and ``n = 0`` the exact value
    ``E|log P_(x_-1 x_0) - log p_(x_0)|`` is returned.

    :raises Unsupported: ``spec`` is neither Bernoulli nor Markov.
    """
    if n < 0:
        raise exceptions.InvalidOrder('n must be >= 0, got {!r}'.format(n))
    if spec.kind == 'bernoulli':
        return 0.0
    if spec.kind != 'markov':
        raise exceptions.Unsupported('memory of {!r} specs is unknown'.format(spec.kind))
    if n >= 1:
        return 0.0
    positive = spec.transition > 0
    weights = spec.stationary[:, None] * spec.transition
    gaps = np.abs(spec.log_transition - spec.log_stationary[None, :])
    return fsum(weights[positive] * gaps[positive])


def entropy_approximation_gap(spec, m: int, budget: int = DEFAULT_BUDGET) -> float:
    """``|H(A^m)/m - h|``."""
    return abs(join_entropy(spec, m, budget) / m - entropy_rate(spec))


def max_cylinder_measure(spec, n: int, budget: int = DEFAULT_BUDGET) -> float:
    """``sup_(A in A^n) mu(A)``."""
    return float(np.exp(enumerate_cylinders(spec, n, budget).log_measure.max()))
