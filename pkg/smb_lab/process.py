"""Stationary symbolic processes: Bernoulli and Markov shifts over a finite
(possibly truncated countable) alphabet.

Specs are validated once and are immutable afterwards, so they can be shared
with worker processes freely.

.. code-block:: python

    from smb_lab import process

    spec = process.validate_spec({
        'type': 'markov',
        'P': [[0.9, 0.1], [0.2, 0.8]],
    })
    spec.stationary  # array([0.66666667, 0.33333333])

    process.cylinder_measure(spec, process.Word.parse('00')).measure  # 0.6

All measures are handled in natural-log space. A zero-measure cylinder has the
log-measure ``-inf``; probabilities are never allowed to underflow to zero.

Spec files are JSON with the fields ``type`` (``"bernoulli"`` or ``"markov"``),
``weights`` or ``P`` (plus an optional stationary vector ``p``), and an optional
``truncation_epsilon``. Countable Bernoulli alphabets are written as a family,
e.g. ``{"type": "bernoulli", "weights": {"family": "geometric", "ratio": 0.5}}``.
"""
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
import hashlib
import json
import logging
import math

import numpy as np
from scipy import linalg, special
from scipy.sparse import csgraph, csr_matrix

from . import exceptions
from ._kernels import as_symbols, markov_walk
from .constants import (
    MAX_ALPHABET,
    STATIONARY_TOLERANCE,
    STOCHASTIC_TOLERANCE,
    TRUNCATION_EPSILON,
)
from .parallel import make_generator

__all__ = (
    'Alphabet',
    'ProcessSpec',
    'Bernoulli',
    'Markov',
    'Word',
    'LogMeasure',
    'Trajectory',
    'validate_spec',
    'load_spec',
    'truncate_weights',
    'cylinder_measure',
    'log_factors',
    'sample_trajectory',
    'iter_symbols',
    'shift_concat_measure',
)

logger = logging.getLogger(__name__)


def _log(values):
    with np.errstate(divide='ignore'):
        return np.log(values)


def _readonly(array):
    array = np.array(array, dtype=np.float64)
    array.setflags(write=False)
    return array


# ##### Types #####

@dataclass(frozen=True)
class Alphabet:
    """Symbols ``0..size-1``. ``tail_mass`` is the probability cut off when a
    countable alphabet was truncated.
    """
    size: int
    truncated: bool = False
    tail_mass: float = 0.0

    def __post_init__(self):
        if self.size < 2:
            raise exceptions.DegenerateSpec('alphabet needs at least 2 symbols')
        if not 0.0 <= self.tail_mass < 1.0:
            raise exceptions.TruncationError('tail mass must lie in [0, 1)')
        if not self.truncated and self.tail_mass != 0.0:
            raise exceptions.TruncationError('tail mass recorded on an untruncated alphabet')


class MatrixPowers:
    """Powers of a square matrix by repeated squaring, caching ``M^(2^i)``."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self._squares = [self.matrix]

    def __repr__(self):
        return '<MatrixPowers(k={}, cached={})>'.format(len(self.matrix), len(self._squares))

    def _square(self, i):
        while len(self._squares) <= i:
            last = self._squares[-1]
            self._squares.append(last @ last)
        return self._squares[i]

    def __call__(self, exponent: int):
        if exponent < 0:
            raise ValueError('exponent must be nonnegative')
        result = np.eye(len(self.matrix))
        bit = 0
        while exponent:
            if exponent & 1:
                result = result @ self._square(bit)
            exponent >>= 1
            bit += 1
        return result


class ProcessSpec:
    """Common interface of `Bernoulli` and `Markov`.

    Both expose a stationary vector and a transition matrix (the rows of a
    Bernoulli spec are all equal to its weights), in plain and log form.
    """
    kind = None

    @property
    def size(self):
        return self.alphabet.size

    @cached_property
    def log_stationary(self):
        return _readonly(_log(self.stationary))

    @cached_property
    def log_transition(self):
        return _readonly(_log(self.transition))

    @cached_property
    def _powers(self):
        return MatrixPowers(self.transition)

    def power(self, exponent: int):
        """``P^exponent`` of the transition matrix."""
        return self._powers(exponent)

    def log_power(self, exponent: int):
        return _log(self.power(exponent))

    @cached_property
    def cumulative_stationary(self):
        return _cumulative(self.stationary[None, :])[0]

    @cached_property
    def cumulative_transition(self):
        return _cumulative(self.transition)

    @cached_property
    def spec_hash(self):
        """SHA-256 of the canonical JSON form of the spec."""
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Bernoulli(ProcessSpec):
    """I.i.d. symbols drawn from ``weights``."""
    weights: np.ndarray
    alphabet: Alphabet
    truncation_epsilon: float = None
    kind = 'bernoulli'

    def __repr__(self):
        return '<Bernoulli(k={})>'.format(self.size)

    @property
    def stationary(self):
        return self.weights

    @cached_property
    def transition(self):
        return _readonly(np.tile(self.weights, (self.size, 1)))

    def to_dict(self):
        data = {'type': 'bernoulli', 'weights': self.weights.tolist()}
        if self.alphabet.truncated:
            data['truncation_epsilon'] = self.truncation_epsilon
        return data


@dataclass(frozen=True, eq=False)
class Markov(ProcessSpec):
    """Stationary Markov chain with initial vector ``initial`` and matrix ``transition``."""
    initial: np.ndarray
    transition: np.ndarray
    alphabet: Alphabet
    kind = 'markov'

    def __repr__(self):
        return '<Markov(k={})>'.format(self.size)

    @property
    def stationary(self):
        return self.initial

    def to_dict(self):
        return {'type': 'markov', 'p': self.initial.tolist(), 'P': self.transition.tolist()}


def _cumulative(rows):
    cumulative = np.cumsum(rows, axis=1)
    for i, row in enumerate(rows):
        cumulative[i, np.flatnonzero(row > 0)[-1]:] = 1.0
    return cumulative


@dataclass(frozen=True)
class Word:
    """Address of an n-cylinder: a finite, nonempty string of symbols."""
    symbols: tuple

    def __post_init__(self):
        object.__setattr__(self, 'symbols', tuple(int(s) for s in self.symbols))
        if not self.symbols:
            raise exceptions.InvalidLength('a word needs at least one symbol')
        if min(self.symbols) < 0:
            raise exceptions.SymbolOutOfRange('symbols must be nonnegative')

    @classmethod
    def parse(cls, text: str):
        """``'0102'`` -> ``Word((0, 1, 0, 2))``. Comma-separated text is also
        accepted for alphabets larger than 10.
        """
        parts = text.split(',') if ',' in text else list(text)
        return cls(tuple(int(part) for part in parts))

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        if max(self.symbols) < 10:
            return ''.join(str(s) for s in self.symbols)
        return ','.join(str(s) for s in self.symbols)


@dataclass(frozen=True)
class LogMeasure:
    """Natural-log measure of a cylinder. ``-inf`` is the zero-measure sentinel."""
    value: float

    def __post_init__(self):
        if math.isnan(self.value) or self.value > 0.0:
            raise ValueError('log-measure must be <= 0, got {!r}'.format(self.value))

    @property
    def is_null(self):
        return self.value == -math.inf

    @property
    def measure(self):
        return math.exp(self.value)

    @property
    def information(self):
        """``-log mu(A)``, the information of a point in this cylinder."""
        return -self.value


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A sampled path. ``symbols`` is a read-only int64 array."""
    seed: int
    symbols: np.ndarray

    def __len__(self):
        return len(self.symbols)

    def word(self, start=0, length=None):
        stop = len(self) if length is None else start + length
        return Word(tuple(self.symbols[start:stop]))


# ##### Validation #####

def _check_probability_vector(vector, name):
    if vector.ndim != 1 or len(vector) < 2:
        raise exceptions.DegenerateSpec('{} must be a vector of at least 2 entries'.format(name))
    if not np.all(np.isfinite(vector)) or np.any(vector < 0):
        raise exceptions.NonStochastic('{} has negative or non-finite entries'.format(name))
    if abs(math.fsum(vector) - 1.0) > STOCHASTIC_TOLERANCE:
        raise exceptions.NonStochastic('{} sums to {!r}'.format(name, math.fsum(vector)))


def _check_bernoulli(weights, alphabet=None, truncation_epsilon=None):
    weights = np.asarray(weights, dtype=np.float64)
    _check_probability_vector(weights, 'weights')
    if np.count_nonzero(weights) < 2:
        raise exceptions.DegenerateSpec('weights put all mass on one symbol')
    alphabet = alphabet or Alphabet(len(weights))
    return Bernoulli(_readonly(weights), alphabet, truncation_epsilon)


def _stationary_vector(transition):
    """Solve ``p (P - I) = 0`` with ``sum(p) = 1`` as one dense linear system."""
    k = len(transition)
    system = transition.T - np.eye(k)
    system[-1, :] = 1.0
    rhs = np.zeros(k)
    rhs[-1] = 1.0
    vector = linalg.solve(system, rhs)
    vector = np.clip(vector, 0.0, None)
    return vector / math.fsum(vector)


def _period(adjacency):
    """Period of an irreducible chain: gcd of ``d(u) + 1 - d(v)`` over edges."""
    distances = csgraph.shortest_path(adjacency, indices=0, unweighted=True)
    rows, cols = adjacency.nonzero()
    levels = distances.astype(np.int64)
    return int(np.gcd.reduce(np.abs(levels[rows] + 1 - levels[cols])))


def _check_markov(transition, initial=None, recompute_stationary=False):
    transition = np.asarray(transition, dtype=np.float64)
    if transition.ndim != 2 or transition.shape[0] != transition.shape[1]:
        raise exceptions.NonStochastic('transition matrix must be square')
    if len(transition) < 2:
        raise exceptions.DegenerateSpec('transition matrix needs at least 2 states')
    if not np.all(np.isfinite(transition)) or np.any(transition < 0):
        raise exceptions.NonStochastic('transition matrix has negative or non-finite entries')
    for i, row in enumerate(transition):
        total = math.fsum(row)
        if abs(total - 1.0) > STOCHASTIC_TOLERANCE:
            raise exceptions.NonStochastic('row {} sums to {!r}'.format(i, total))
    adjacency = csr_matrix((transition > 0).astype(np.float64))
    components, _ = csgraph.connected_components(adjacency, directed=True, connection='strong')
    if components != 1:
        raise exceptions.Reducible('chain has {} communicating classes'.format(components))
    period = _period(adjacency)
    if period != 1:
        raise exceptions.Periodic('chain has period {}'.format(period))

    if initial is None or recompute_stationary:
        initial = _stationary_vector(transition)
        logger.debug('Recomputed stationary vector for %d states', len(transition))
    else:
        initial = np.asarray(initial, dtype=np.float64)
        if initial.shape != (len(transition),):
            raise exceptions.NotStationary('initial vector has the wrong length')
        _check_probability_vector(initial, 'p')
        drift = np.max(np.abs(initial @ transition - initial))
        if drift > STATIONARY_TOLERANCE:
            raise exceptions.NotStationary('p·P differs from p by {!r}'.format(drift))
    return Markov(_readonly(initial), _readonly(transition), Alphabet(len(transition)))


def truncate_weights(family: Mapping, epsilon: float = TRUNCATION_EPSILON,
                     max_size: int = MAX_ALPHABET):
    """Truncate a countable weight family to the smallest alphabet whose tail mass
    is below ``epsilon``. Returns ``(weights, alphabet)``; the kept weights are
    renormalised and the cut-off mass is recorded on the alphabet.

    Families:

    - ``{"family": "geometric", "ratio": r}``: ``p_j = (1 - r) r^j``, ``j >= 0``
    - ``{"family": "zeta", "exponent": s}``: ``p_j = j^(-s) / zeta(s)``, ``j >= 1``
    """
    name = family.get('family')
    if not 0 < epsilon < 1:
        raise exceptions.TruncationError('truncation epsilon must lie in (0, 1)')
    if name == 'geometric':
        ratio = float(family['ratio'])
        if not 0 < ratio < 1:
            raise exceptions.TruncationError('geometric ratio must lie in (0, 1)')
        size = max(2, int(math.floor(math.log(epsilon) / math.log(ratio))) + 1)
        if size > max_size:
            raise exceptions.TruncationError('needs {} symbols'.format(size))
        weights = (1 - ratio) * ratio ** np.arange(size)
        tail = ratio ** size
    elif name == 'zeta':
        exponent = float(family['exponent'])
        if exponent <= 1:
            raise exceptions.TruncationError('zeta exponent must exceed 1')
        total = special.zeta(exponent)

        def tail_after(k):
            return special.zeta(exponent, k + 1) / total

        size = 2
        while tail_after(size) >= epsilon:
            size *= 2
            if size > 2 * max_size:
                raise exceptions.TruncationError('needs more than {} symbols'.format(max_size))
        low, high = size // 2, size
        while low + 1 < high:
            middle = (low + high) // 2
            if tail_after(middle) < epsilon:
                high = middle
            else:
                low = middle
        size = max(2, high)
        if size > max_size:
            raise exceptions.TruncationError('needs {} symbols'.format(size))
        weights = np.arange(1, size + 1, dtype=np.float64) ** -exponent / total
        tail = tail_after(size)
    else:
        raise exceptions.TruncationError('unknown weight family {!r}'.format(name))
    logger.warning('Truncated %s weights to %d symbols (tail mass %.3g)', name, size, tail)
    weights = weights / math.fsum(weights)
    return weights, Alphabet(size, truncated=True, tail_mass=float(tail))


def validate_spec(raw, *, recompute_stationary=False):
    """Validate and normalise a process specification.

    :param raw: A `ProcessSpec` or a mapping in the spec-file format.
    :param recompute_stationary: Replace the supplied stationary vector of a
        Markov spec by the solution of ``p·P = p``.
    :raises NonStochastic: A row or weight vector does not sum to 1.
    :raises NotStationary: ``p·P != p`` and no recompute was requested.
    :raises Reducible: The chain is not irreducible.
    :raises Periodic: The chain is periodic.
    """
    if isinstance(raw, Bernoulli):
        return _check_bernoulli(raw.weights, raw.alphabet, raw.truncation_epsilon)
    if isinstance(raw, Markov):
        return _check_markov(raw.transition, raw.initial, recompute_stationary)
    if not isinstance(raw, Mapping):
        raise exceptions.SpecError('spec must be a mapping, got {!r}'.format(type(raw)))
    kind = raw.get('type')
    try:
        if kind == 'bernoulli':
            weights = raw['weights']
            if isinstance(weights, Mapping):
                epsilon = float(raw.get('truncation_epsilon', TRUNCATION_EPSILON))
                weights, alphabet = truncate_weights(weights, epsilon)
                return _check_bernoulli(weights, alphabet, epsilon)
            return _check_bernoulli(weights)
        if kind == 'markov':
            return _check_markov(raw['P'], raw.get('p'), recompute_stationary)
    except KeyError as error:
        raise exceptions.SpecError('spec is missing field {}'.format(error)) from error
    except (TypeError, ValueError) as error:
        if isinstance(error, exceptions.SmbLabError):
            raise
        raise exceptions.SpecError(str(error)) from error
    raise exceptions.SpecError('unknown spec type {!r}'.format(kind))


def load_spec(path, **kwargs):
    """Read and validate a JSON spec file. Markov files without ``p`` get their
    stationary vector recomputed.
    """
    with open(path) as fp:
        try:
            raw = json.load(fp)
        except json.JSONDecodeError as error:
            raise exceptions.SpecError('{}: {}'.format(path, error)) from error
    return validate_spec(raw, **kwargs)


# ##### Measures #####

def _check_word(spec, symbols):
    if symbols.max() >= spec.size:
        raise exceptions.SymbolOutOfRange(
            'symbol {} outside alphabet of size {}'.format(int(symbols.max()), spec.size))


def log_factors(spec, symbols):
    """Per-position log factors of the measure of ``symbols``: the stationary
    weight of the first symbol, then one transition per step.
    """
    symbols = np.asarray(symbols)
    if spec.kind == 'bernoulli':
        return spec.log_stationary[symbols]
    factors = np.empty(len(symbols))
    factors[0] = spec.log_stationary[symbols[0]]
    factors[1:] = spec.log_transition[symbols[:-1], symbols[1:]]
    return factors


def cylinder_measure(spec: ProcessSpec, word: Word) -> LogMeasure:
    """``log mu([word])``. Factors are summed left to right, so the result is
    bitwise equal to the running information along a path.

    :raises SymbolOutOfRange: The word leaves the alphabet.
    """
    symbols = np.asarray(word.symbols)
    _check_word(spec, symbols)
    return LogMeasure(float(np.cumsum(log_factors(spec, symbols))[-1]))


def shift_concat_measure(spec: ProcessSpec, left: Word, gap: int, right: Word) -> LogMeasure:
    """``log mu([left] ∩ T^(-gap-len(left)) [right])``: ``right`` starts ``gap``
    symbols after ``left`` ends.

    :raises InvalidGap: ``gap`` is negative.
    """
    if gap < 0:
        raise exceptions.InvalidGap('gap must be >= 0, got {}'.format(gap))
    left_value = cylinder_measure(spec, left).value
    right_value = cylinder_measure(spec, right).value
    if spec.kind == 'bernoulli':
        return LogMeasure(left_value + right_value)
    first = right.symbols[0]
    bridge = spec.log_power(gap + 1)[left.symbols[-1], first]
    value = ((left_value + bridge) + right_value) - spec.log_stationary[first]
    return LogMeasure(min(float(value), 0.0))


# ##### Sampling #####

def _draw(spec, rng, count, state=None):
    """Draw ``count`` symbols by inverse CDF. ``state`` is the previous symbol of a
    stream, or None to start from the stationary vector.
    """
    uniforms = rng.random(count)
    if spec.kind == 'bernoulli':
        out = np.searchsorted(spec.cumulative_stationary, uniforms, side='right')
        out = out.astype(np.int64)
        return out, int(out[-1])
    out = np.empty(count, dtype=np.int64)
    start = 0
    if state is None:
        state = int(np.searchsorted(spec.cumulative_stationary, uniforms[0], side='right'))
        out[0] = state
        start = 1
    state = markov_walk(spec.cumulative_transition, state, uniforms[start:], out[start:])
    return out, int(state)


def sample_trajectory(spec: ProcessSpec, length: int, seed: int) -> Trajectory:
    """Sample ``length`` symbols of the stationary process. Deterministic in
    ``(spec, length, seed)``.

    :raises InvalidLength: ``length < 1``.
    """
    if length < 1:
        raise exceptions.InvalidLength('trajectory length must be >= 1, got {}'.format(length))
    symbols, _ = _draw(spec, make_generator(seed), int(length))
    symbols = as_symbols(symbols)
    symbols.setflags(write=False)
    return Trajectory(int(seed), symbols)


def iter_symbols(spec: ProcessSpec, seed: int, chunk_size: int = 2 ** 16,
                 max_chunk_size: int = 2 ** 22):
    """Endless stream of symbol chunks. Chunk sizes double up to ``max_chunk_size``;
    the concatenated stream equals `sample_trajectory` with the same seed.
    """
    rng = make_generator(seed)
    state = None
    size = int(chunk_size)
    while True:
        chunk, state = _draw(spec, rng, size, state)
        yield chunk
        size = min(2 * size, int(max_chunk_size))
