"""Exception hierarchy. Spec and parameter problems are also `ValueError` so that
callers who only know the standard library can still catch them.
"""

__all__ = (
    'SmbLabError',
    'SpecError',
    'NonStochastic',
    'NotStationary',
    'Reducible',
    'Periodic',
    'DegenerateSpec',
    'TruncationError',
    'SymbolOutOfRange',
    'InvalidLength',
    'InvalidGap',
    'ComputationError',
    'BudgetExceeded',
    'InvalidOrder',
    'InvalidExponent',
    'SeriesNotConverged',
    'Unsupported',
    'NotReached',
    'NotFound',
    'NotFoundRateExceeded',
    'DegenerateVariance',
    'GridExceedsTrajectory',
    'InvalidAlpha',
    'InvalidSampleSize',
    'NonFiniteValue',
    'ConfigError',
    'SchemaMismatch',
)


class SmbLabError(Exception):
    """Base class for all errors raised by smb_lab."""


# ##### Process specifications #####

class SpecError(SmbLabError, ValueError):
    """A process specification (or a word over it) is invalid."""


class NonStochastic(SpecError):
    """Negative entries, or a row / weight vector that does not sum to 1."""


class NotStationary(SpecError):
    """The supplied initial vector is not invariant under the transition matrix."""


class Reducible(SpecError):
    """The transition matrix is not irreducible."""


class Periodic(SpecError):
    """The transition matrix is irreducible but periodic."""


class DegenerateSpec(SpecError):
    """Fewer than two symbols carry positive mass."""


class TruncationError(SpecError):
    """A countable alphabet cannot be truncated within the configured cap."""


class SymbolOutOfRange(SpecError):
    """A word uses a symbol outside the spec's alphabet."""


class InvalidLength(SpecError):
    """A length argument is out of range."""


class InvalidGap(SpecError):
    """A gap argument is negative."""


# ##### Computations #####

class ComputationError(SmbLabError):
    """A computation could not produce its result."""


class BudgetExceeded(ComputationError):
    """An enumeration would visit more cylinders than the budget allows."""

    def __init__(self, required, budget):
        self.required = required
        self.budget = budget
        super().__init__('enumeration needs {} cylinders, budget is {}'.format(required, budget))


class InvalidOrder(ComputationError, ValueError):
    """A join order ``n`` is out of range."""


class InvalidExponent(ComputationError, ValueError):
    """A moment exponent is out of range."""


class SeriesNotConverged(ComputationError):
    """A truncated series did not reach its cutoff within the term cap."""


class Unsupported(ComputationError):
    """The operation is not defined for this kind of spec."""


class NotReached(ComputationError):
    """No tabulated gap brings the mixing coefficient below the threshold."""


class NotFound(ComputationError):
    """A recurrence search exhausted its window."""

    def __init__(self, scan_limit):
        self.scan_limit = scan_limit
        super().__init__('no recurrence within {} shifts'.format(scan_limit))


class NotFoundRateExceeded(ComputationError):
    """Too many recurrence searches in an experiment ran out of window."""


class DegenerateVariance(ComputationError):
    """The limiting variance is zero, so the information cannot be standardized."""


class GridExceedsTrajectory(ComputationError, ValueError):
    """An order in the grid is longer than the trajectory."""


class InvalidAlpha(ComputationError, ValueError):
    """The gap exponent of a block schedule is outside (0, 1)."""


class InvalidSampleSize(ComputationError, ValueError):
    """Too few Monte Carlo samples were requested."""


class NonFiniteValue(ComputationError):
    """A NaN or infinite value reached a report column that does not allow it."""


# ##### Command line #####

class ConfigError(SmbLabError, ValueError):
    """An experiment config is malformed."""


class SchemaMismatch(SmbLabError):
    """Two reports cannot be compared column by column."""
