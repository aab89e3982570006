"""Defaults shared across the package. Every tolerance and cap lives here so that
experiments can be reasoned about from one place.
"""

#: Maximum number of cylinders (or cylinder pairs) an enumeration may visit.
DEFAULT_BUDGET = 2 ** 24

#: Tail mass below which a countable alphabet is cut off.
TRUNCATION_EPSILON = 1e-9

#: Largest alphabet a truncation may produce.
MAX_ALPHABET = 10 ** 5

#: Row sums and weight sums must be within this of 1.
STOCHASTIC_TOLERANCE = 1e-12

#: ``p·P`` must be within this of ``p`` componentwise.
STATIONARY_TOLERANCE = 1e-10

#: Markov variance series stops at the first term below this...
SERIES_CUTOFF = 1e-14
#: ...or fails after this many terms.
SERIES_CAP = 10 ** 4

#: Number of largest orders used by the ``a + b n^(-1/4)`` variance extrapolation.
EXTRAPOLATION_POINTS = 8

#: Smallest order used when fitting the decay rate of the variance discrepancy.
RATE_FIT_MIN_N = 8

#: Largest gap tabulated by the default doubling grid.
DEFAULT_MAX_GAP = 64

#: Recurrence searches give up after this many shifts.
DEFAULT_SCAN_LIMIT = 2 ** 28

#: Fraction of NotFound recurrence searches tolerated by an experiment.
MAX_NOT_FOUND_RATE = 0.01

#: Fewest paths accepted by the CLT experiment.
MIN_CLT_SAMPLES = 100

#: Environment variable capping the worker count.
THREADS_ENV_VAR = 'SMB_LAB_THREADS'

#: Output token for zero-measure log values in designated CSV columns.
NEG_INF_TOKEN = '-inf'

#: Significant digits written for floats.
FLOAT_FORMAT = '{:.17g}'

#: Commands understood by ``smb-lab run``.
COMMANDS = (
    'entropy',
    'variance',
    'moments',
    'mixing',
    'clt',
    'recurrence',
    'smb-path',
    'blocks',
)
