"""Mixing coefficients of a stationary process.

The β-mixing sum is computed two ways: by brute force over cylinder pairs, and,
for Markov chains, from the closed form

    beta(gap) = sum_b p_b sum_c |(P^(gap+1))_bc - p_c|

which does not depend on the cylinder lengths. The two must agree on every
feasible ``(n, m)``.

.. code-block:: python

    from smb_lab import mixing

    curve = mixing.mixing_curve(spec, gaps=range(1, 9))
    mixing.weak_bernoulli_threshold(curve, epsilon=0.05)

ψ and φ are computed at atom level: ψ over pairs of atoms, and left φ as the sup
over unions of right atoms for each fixed left atom, which is exact for that
inner sup. Atoms of zero measure never enter (their ratios are undefined).
"""
from dataclasses import dataclass
import logging

import numpy as np

from . import exceptions
from .constants import DEFAULT_BUDGET, DEFAULT_MAX_GAP
from .cylinders import enumerate_pairs, eta, fsum

__all__ = (
    'MixingCurve',
    'PairDiscrepancy',
    'beta_bruteforce',
    'beta_markov_closed',
    'atom_psi_phi',
    'alpha_atom',
    'weak_bernoulli_threshold',
    'weak_bernoulli_defect',
    'rho_discrepancy',
    'entropy_additivity_defect',
    'uniform_mixing_average',
    'mixing_curve',
    'doubling_grid',
    'fit_power',
)

logger = logging.getLogger(__name__)

#: Slack allowed when checking that a curve does not increase.
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class MixingCurve:
    """``gap -> beta(gap)`` with optional atom-level ψ and φ along the same gaps."""
    gaps: tuple
    beta: tuple
    psi_atom: tuple = None
    phi_atom: tuple = None
    fitted_power: float = None

    def __post_init__(self):
        if len(self.gaps) != len(self.beta):
            raise ValueError('gaps and beta differ in length')
        if any(b < -MONOTONE_SLACK or b > 2 + MONOTONE_SLACK for b in self.beta):
            raise ValueError('beta values must lie in [0, 2]')
        if any(later > earlier + MONOTONE_SLACK
               for earlier, later in zip(self.beta, self.beta[1:])):
            raise ValueError('beta must be non-increasing in the gap')

    @property
    def columns(self):
        return ('gap', 'beta', 'psi_atom', 'phi_atom')

    def as_rows(self):
        psi = self.psi_atom or (None,) * len(self.gaps)
        phi = self.phi_atom or (None,) * len(self.gaps)
        return list(zip(self.gaps, self.beta, psi, phi))


@dataclass(frozen=True)
class PairDiscrepancy:
    """``sum mu(B∩C) |log(1 + rho(B,C)/(mu(B) mu(C)))|^a`` over cylinder pairs."""
    n: int
    m: int
    gap: int
    value: float
    a: float


# ##### β #####

def beta_bruteforce(spec, n: int, m: int, gap: int, budget: int = DEFAULT_BUDGET) -> float:
    """``sum_(B,C) |mu(B∩C) - mu(B) mu(C)|`` over ``A^n x T^(-gap-n) A^m``."""
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    return fsum(np.abs(pairs.joint - pairs.product))


def beta_markov_closed(spec, gap: int) -> float:
    """Closed-form β for a Markov chain; 0 for a Bernoulli spec."""
    if gap < 0:
        raise exceptions.InvalidGap('gap must be >= 0, got {}'.format(gap))
    if spec.kind == 'bernoulli':
        return 0.0
    if spec.kind != 'markov':
        raise exceptions.Unsupported('no closed form for {!r} specs'.format(spec.kind))
    deviation = np.abs(spec.power(gap + 1) - spec.stationary[None, :])
    return fsum(spec.stationary[:, None] * deviation)


def _ratios(pairs):
    return np.exp(pairs.log_joint - pairs.log_product)


def atom_psi_phi(spec, n: int, m: int, gap: int, budget: int = DEFAULT_BUDGET):
    """Atom-level ``(psi, phi_left)``.

    ``psi = max |mu(B∩C)/(mu(B) mu(C)) - 1|`` and
    ``phi = max_B 1/2 sum_C |mu(B∩C)/mu(B) - mu(C)|``.
    """
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    ratios = _ratios(pairs)
    psi = float(np.max(np.abs(ratios - 1.0)))
    # mu(B∩C)/mu(B) - mu(C) = mu(C) (ratio - 1)
    right = np.exp(pairs.right.log_measure)[None, :]
    phi = max(0.5 * fsum(row) for row in right * np.abs(ratios - 1.0))
    return psi, phi


def alpha_atom(spec, n: int, m: int, gap: int, budget: int = DEFAULT_BUDGET) -> float:
    """Strong-mixing value at atom level: ``max |mu(B∩C) - mu(B) mu(C)|``."""
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    return float(np.max(np.abs(pairs.joint - pairs.product)))


def weak_bernoulli_defect(spec, n: int, m: int, gap: int, budget: int = DEFAULT_BUDGET) -> float:
    """``max_C sum_B |rho(B,C)| / mu(C)``; the weak Bernoulli property asks for this
    to fall below any ε once the gap is large.
    """
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    column_sums = np.array([fsum(column) for column in np.abs(pairs.joint - pairs.product).T])
    return float(np.max(column_sums / np.exp(pairs.right.log_measure)))


def weak_bernoulli_threshold(curve: MixingCurve, epsilon: float) -> int:
    """Smallest tabulated gap with ``beta(gap) <= epsilon``.

    :raises NotReached: No tabulated gap gets there.
    """
    if epsilon < 0:
        raise ValueError('epsilon must be >= 0')
    for gap, beta in zip(curve.gaps, curve.beta):
        if beta <= epsilon:
            return gap
    raise exceptions.NotReached(
        'beta stays above {!r} up to gap {}'.format(epsilon, curve.gaps[-1]))


# ##### Discrepancies #####

def rho_discrepancy(spec, n: int, m: int, gap: int, a: float,
                    budget: int = DEFAULT_BUDGET) -> PairDiscrepancy:
    """Exact ``sum mu(B∩C) |log(1 + rho(B,C)/(mu(B) mu(C)))|^a``. The log argument
    equals ``mu(B∩C)/(mu(B) mu(C))``; pairs of zero joint measure contribute 0.

    :raises InvalidExponent: ``a < 1``.
    """
    if a < 1:
        raise exceptions.InvalidExponent('a must be >= 1, got {!r}'.format(a))
    pairs = enumerate_pairs(spec, n, m, gap, budget)
    finite = np.isfinite(pairs.log_joint)
    log_ratio = (pairs.log_joint - pairs.log_product)[finite]
    value = fsum(np.exp(pairs.log_joint[finite]) * np.power(np.abs(log_ratio), a))
    return PairDiscrepancy(int(n), int(m), int(gap), value, float(a))


def entropy_additivity_defect(spec, n: int, gap: int, budget: int = DEFAULT_BUDGET) -> float:
    """``|H(A^n ∨ T^(-gap-n) A^n) - 2 H(A^n)|``."""
    pairs = enumerate_pairs(spec, n, n, gap, budget)
    joint = fsum(eta(pairs.log_joint, 1))
    single = fsum(eta(pairs.left.log_measure, 1))
    return abs(joint - 2 * single)


def uniform_mixing_average(spec, n: int, m: int, k: int, budget: int = DEFAULT_BUDGET) -> float:
    """Diagnostic Cesàro average
    ``max_(B,C) |1/k sum_(j=1..k) mu(B ∩ T^(-n-j) C) - mu(B) mu(C)|``.
    """
    if k < 1:
        raise ValueError('k must be >= 1')
    joints = [enumerate_pairs(spec, n, m, j, budget).joint for j in range(1, k + 1)]
    average = np.mean(joints, axis=0)
    product = enumerate_pairs(spec, n, m, 0, budget).product
    return float(np.max(np.abs(average - product)))


# ##### Curves #####

def doubling_grid(max_gap: int = DEFAULT_MAX_GAP):
    """``(0, 1, 2, 4, ..., max_gap)``."""
    gaps = [0]
    gap = 1
    while gap <= max_gap:
        gaps.append(gap)
        gap *= 2
    return tuple(gaps)


def fit_power(gaps, values):
    """Decay power ``p`` of ``values ~ c gaps^(-p)`` from a log-log least-squares fit
    over positive gaps and values. None with fewer than two usable points.
    """
    gaps = np.asarray(gaps, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    keep = (gaps > 0) & (values > 0)
    if keep.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(gaps[keep]), np.log(values[keep]), 1)
    return float(-slope)


def mixing_curve(spec, gaps=None, n: int = 1, m: int = 1, method: str = 'closed',
                 atoms: bool = True, budget: int = DEFAULT_BUDGET) -> MixingCurve:
    """Tabulate β (and atom-level ψ, φ at the given ``n``, ``m``) over ``gaps``.

    :param method: ``'closed'`` uses `beta_markov_closed`, ``'bruteforce'`` uses
        `beta_bruteforce` at ``(n, m)``.
    """
    gaps = tuple(int(gap) for gap in (doubling_grid() if gaps is None else gaps))
    if method == 'closed':
        beta = tuple(beta_markov_closed(spec, gap) for gap in gaps)
    elif method == 'bruteforce':
        beta = tuple(beta_bruteforce(spec, n, m, gap, budget) for gap in gaps)
    else:
        raise ValueError('unknown mixing method {!r}'.format(method))
    psi = phi = None
    if atoms:
        values = [atom_psi_phi(spec, n, m, gap, budget) for gap in gaps]
        psi = tuple(value[0] for value in values)
        phi = tuple(value[1] for value in values)
    logger.debug('Tabulated beta over %d gaps (%s)', len(gaps), method)
    return MixingCurve(gaps, beta, psi, phi, fit_power(gaps, beta))

