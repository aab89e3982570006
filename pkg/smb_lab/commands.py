"""Handlers behind ``smb-lab run``: one per command, each turning a spec and the
config's parameters into a row table plus pass flags.

Parameters are read with ``parameters.get(KEY, DEFAULTS[command][KEY])``; the
defaults below reproduce the desk-scale acceptance runs.
"""
from dataclasses import dataclass, field
import logging
import math
import sys

import numpy as np

from . import asymptotics, cylinders, exceptions, mixing, recurrence
from .constants import DEFAULT_BUDGET, DEFAULT_SCAN_LIMIT, MIN_CLT_SAMPLES
from .routing import CommandRouter, add_command_context

__all__ = (
    'CommandResult',
    'DEFAULTS',
    'router',
)

logger = logging.getLogger(__name__)

#: Tolerance of exact identities (closed forms against enumeration).
EXACT_TOLERANCE = 1e-10

#: Default configuration
DEFAULTS = {
    'entropy': {
        'n_grid': list(range(1, 9)),
        'budget': DEFAULT_BUDGET,
    },
    'variance': {
        'n_max': 12,
        'method': 'formula',
        'max_rate': -0.2,
        'budget': DEFAULT_BUDGET,
    },
    'moments': {
        'n_grid': list(range(1, 9)),
        'w': [1, 2, 4],
        'ell': [2, 4],
        'q': 4,
        'growth_min_n': 8,
        'max_growth_ratio': 3.0,
        'subadditivity_max_order': 2,
        'subadditivity_max_gap': 2,
        'budget': DEFAULT_BUDGET,
    },
    'mixing': {
        'delta_grid': None,
        'n': 1,
        'm': 1,
        'method': 'closed',
        'atoms': True,
        'epsilon': 0.05,
        'budget': DEFAULT_BUDGET,
    },
    'clt': {
        'n': 2000,
        'samples': 20000,
        'ks_threshold': 0.05,
    },
    'recurrence': {
        'n': 24,
        'samples': 1000,
        'scan_limit': DEFAULT_SCAN_LIMIT,
        'max_relative_error': 0.15,
        'max_correction': 0.25,
    },
    'smb-path': {
        'length': 10 ** 6,
        'paths': 3,
        'n_grid': None,
        'tolerance': 0.01,
    },
    'blocks': {
        'alpha': 0.5,
        'n_values': [10 ** 3, 10 ** 4, 10 ** 5],
        'paths': 100,
        'identity_max': 10 ** 6,
        'growth_range': [0.6, 0.73],
    },
}


@dataclass(frozen=True)
class CommandResult:
    columns: tuple
    rows: tuple
    pass_flags: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    log_columns: tuple = ()


def _reader(command, parameters):
    unknown = sorted(set(parameters) - set(DEFAULTS[command]))
    if unknown:
        raise exceptions.ConfigError(
            'unknown parameters for {}: {}'.format(command, ', '.join(unknown)))
    for key, value in parameters.items():
        if isinstance(value, (list, tuple)) and not value:
            raise exceptions.ConfigError(
                'parameter {!r} of {} must not be empty'.format(key, command))
    defaults = DEFAULTS[command]
    return lambda key: parameters.get(key, defaults[key])


def run_entropy(spec, parameters, seed):
    """``H(A^n)`` by enumeration against the closed form, the approximation gap
    ``|H_n/n - h|`` and the largest atom of each join.
    """
    get = _reader('entropy', parameters)
    budget = get('budget')
    h = cylinders.entropy_rate(spec)
    rows = []
    for n in get('n_grid'):
        table = cylinders.enumerate_cylinders(spec, n, budget)
        enumerated = cylinders.fsum(cylinders.eta(table.log_measure, 1))
        closed = cylinders.closed_join_entropy(spec, n)
        rows.append((
            n, enumerated, closed, abs(enumerated - closed), abs(enumerated / n - h),
            float(table.log_measure.max()),
        ))
    return CommandResult(
        columns=('n', 'H_n', 'H_closed', 'abs_error', 'rate_gap', 'log_max_measure'),
        rows=tuple(rows),
        pass_flags={'closed_form': all(row[3] <= EXACT_TOLERANCE for row in rows)},
        metadata={
            'h': h,
            'alphabet_size': spec.size,
            'conditional_prob_gap_0': cylinders.conditional_prob_gap(spec, 0),
            'conditional_prob_gap_1': cylinders.conditional_prob_gap(spec, 1),
        },
        log_columns=('log_max_measure',),
    )


def run_variance(spec, parameters, seed):
    """Finite-n variances ``var_n / n`` against the limiting variance."""
    get = _reader('variance', parameters)
    report = cylinders.limit_variance(spec, get('n_max'), get('method'), get('budget'))
    rows = tuple(
        (n, value, abs(value - report.sigma2_limit))
        for n, value in zip(report.n_values, report.sigma2_by_n)
    )
    rate = report.fitted_rate
    return CommandResult(
        columns=('n', 'var_n_over_n', 'abs_error'),
        rows=rows,
        pass_flags={'decay_rate': rate is None or rate <= get('max_rate')},
        metadata={
            'sigma2': report.sigma2_limit,
            'method': report.method,
            'extrapolated': report.extrapolated,
            'fitted_rate': rate,
            'series_terms': report.series_terms,
        },
    )


def run_moments(spec, parameters, seed):
    """Moment table, ``K_w`` growth ratios, moment growth and the subadditivity grid."""
    get = _reader('moments', parameters)
    budget = get('budget')
    n_grid = list(get('n_grid'))
    w_values = list(get('w'))
    q = get('q')
    table = cylinders.moment_table(spec, n_grid, w_values, sorted(set(get('ell')) | {q}), budget)

    # Iterated joins only bound K_w for w > 1 under the small-atom convention.
    checked = [
        w for w in w_values
        if w == 1 or (w > 1 and cylinders.small_atom_convention(spec, w))
    ]
    ratios = {w: cylinders.k_growth_ratios(spec, n_grid, w, budget) for w in checked}
    pass_flags = {
        'k_growth': all(r <= 1 + EXACT_TOLERANCE for values in ratios.values() for r in values),
    }

    growth = [row.M[q] / row.n ** (q / 2) for row in table if row.n >= get('growth_min_n')]
    metadata = {'k_growth_checked_w': checked}
    if len(growth) >= 2:
        metadata['moment_growth_ratio'] = max(growth) / min(growth)
        pass_flags['moment_growth'] = metadata['moment_growth_ratio'] < get('max_growth_ratio')

    reports = [
        cylinders.subadditivity_check(spec, n, m, gap, w, budget)
        for n in range(1, get('subadditivity_max_order') + 1)
        for m in range(1, get('subadditivity_max_order') + 1)
        for gap in range(get('subadditivity_max_gap') + 1)
        for w in w_values if w >= 1
    ]
    pass_flags['subadditivity'] = all(report.holds(EXACT_TOLERANCE) for report in reports)
    metadata['subadditivity_checks'] = len(reports)
    metadata['subadditivity_min_chain_slack'] = min(report.chain for report in reports)
    return CommandResult(
        cylinders.MomentTable.columns, tuple(table.as_rows()), pass_flags, metadata)


def run_mixing(spec, parameters, seed):
    """β over the gap grid (with the brute-force cylinder sum alongside), atom-level
    ψ and φ, and the weak-Bernoulli threshold.
    """
    get = _reader('mixing', parameters)
    n, m, budget = get('n'), get('m'), get('budget')
    curve = mixing.mixing_curve(
        spec, get('delta_grid'), n, m, get('method'), get('atoms'), budget)
    brute = [mixing.beta_bruteforce(spec, n, m, gap, budget) for gap in curve.gaps]
    rows = tuple(
        (gap, beta, bruteforce, psi, phi)
        for (gap, beta, psi, phi), bruteforce in zip(curve.as_rows(), brute)
    )
    try:
        threshold = mixing.weak_bernoulli_threshold(curve, get('epsilon'))
    except exceptions.NotReached:
        logger.info('beta stays above %s on the gap grid', get('epsilon'))
        threshold = None
    deviation = max(abs(row[1] - row[2]) for row in rows)
    return CommandResult(
        columns=('gap', 'beta', 'beta_bruteforce', 'psi_atom', 'phi_atom'),
        rows=rows,
        pass_flags={'oracle_match': deviation <= 1e-12},
        metadata={
            'n': n,
            'm': m,
            'method': get('method'),
            'fitted_power': curve.fitted_power,
            'weak_bernoulli_threshold': threshold,
            'max_oracle_deviation': deviation,
        },
    )


def run_clt(spec, parameters, seed):
    """Kolmogorov-Smirnov distance of the standardized information to N(0, 1)."""
    get = _reader('clt', parameters)
    samples = get('samples')
    if samples < MIN_CLT_SAMPLES:
        raise exceptions.ConfigError(
            'clt needs samples >= {}, got {}'.format(MIN_CLT_SAMPLES, samples))
    report = asymptotics.clt_experiment(spec, get('n'), samples, seed)
    row = (report.n, report.samples, report.mean, report.variance, report.skew,
           report.ks_distance, report.h_used, report.sigma_used)
    return CommandResult(
        columns=('n', 'samples', 'mean', 'variance', 'skew', 'ks_distance', 'h', 'sigma'),
        rows=(row,),
        pass_flags={
            'ks': report.ks_distance < get('ks_threshold'),
            'mean_band': abs(report.mean) <= 3 / math.sqrt(samples),
        },
    )


def run_recurrence(spec, parameters, seed):
    """Recurrence times ``R_n`` against the entropy rate."""
    get = _reader('recurrence', parameters)
    report = recurrence.recurrence_experiment(
        spec, get('n'), get('samples'), seed, get('scan_limit'))
    return CommandResult(
        columns=('path', 'R_n', 'log_R_over_n', 'log_R_minus_I'),
        rows=report.rows,
        pass_flags={
            'rate': report.median_relative_error < get('max_relative_error'),
            'correction': report.p90_correction < get('max_correction') * report.h,
        },
        metadata={
            'h': report.h,
            'median_rate': report.median_rate,
            'p90_correction': report.p90_correction,
            'not_found_rate': report.not_found_rate,
        },
    )


def run_smb_path(spec, parameters, seed):
    """``I_n / n`` along single long paths."""
    get = _reader('smb-path', parameters)
    length = get('length')
    rows = asymptotics.smb_experiment(spec, length, get('paths'), seed, get('n_grid'))
    final = [row[4] for row in rows if row[1] == length]
    return CommandResult(
        columns=('path', 'n', 'I_n', 'I_n_over_n', 'abs_error'),
        rows=tuple(rows),
        pass_flags={'smb': all(error < get('tolerance') for error in final)},
        metadata={'h': cylinders.entropy_rate(spec)},
    )


def run_blocks(spec, parameters, seed):
    """Block/gap schedule checks and the decomposition error along paths."""
    get = _reader('blocks', parameters)
    alpha = get('alpha')
    n_values = list(get('n_values'))
    identity = asymptotics.partition_identity_holds(get('identity_max'), alpha)
    grid = np.unique(np.logspace(3, math.log10(get('identity_max')), 16).astype(np.int64))
    exponent = asymptotics.schedule_growth_exponent(grid, alpha)
    low, high = get('growth_range')
    rows = asymptotics.block_error_experiment(spec, n_values, alpha, get('paths'), seed)
    scaled = [row[5] for row in rows]
    return CommandResult(
        columns=('n', 'Q', 'remainder', 'median_error', 'p90_error', 'median_over_n',
                 'p90_over_n_0_9'),
        rows=tuple(rows),
        pass_flags={
            'partition_identity': identity,
            'growth_exponent': low <= exponent <= high,
            'error_trend': all(b <= a for a, b in zip(scaled, scaled[1:])),
        },
        metadata={'alpha': alpha, 'growth_exponent': exponent},
    )


router = CommandRouter()

with add_command_context(router, module=sys.modules[__name__]) as command:
    command('entropy', 'run_entropy')
    command('variance', 'run_variance')
    command('moments', 'run_moments')
    command('mixing', 'run_mixing')
    command('clt', 'run_clt')
    command('recurrence', 'run_recurrence')
    command('smb-path', 'run_smb_path')
    command('blocks', 'run_blocks')
