"""Compiled inner loops. Both loops are inherently sequential, so they are jitted
with numba rather than vectorized.
"""
import numba as nb
import numpy as np

#: Rolling hash parameters. Products stay below 2**62, so int64 never overflows.
HASH_BASE = 1000003
HASH_MODULUS = 2147483647


@nb.njit(cache=True, nogil=True)
def markov_walk(cumulative, state, uniforms, out):
    """Fill ``out`` with a Markov path started after ``state``.

    ``cumulative[i]`` is the cumulative sum of row ``i`` with its last entry
    forced to 1. Returns the final state so a stream can be continued.
    """
    k = cumulative.shape[1]
    for t in range(uniforms.shape[0]):
        row = cumulative[state]
        u = uniforms[t]
        nxt = 0
        # side='right' search so zero-width intervals are skipped
        while nxt < k - 1 and row[nxt] <= u:
            nxt += 1
        out[t] = nxt
        state = nxt
    return state


@nb.njit(cache=True, nogil=True)
def find_window(haystack, needle, start, stop):
    """First ``i`` in ``[start, stop]`` with ``haystack[i:i + len(needle)] == needle``.

    Rabin-Karp over the windows of ``haystack``; hash hits are verified symbol by
    symbol. Returns -1 when there is no match.
    """
    n = needle.shape[0]
    last = min(stop, haystack.shape[0] - n)
    if n == 0 or last < start:
        return -1
    target = 0
    window = 0
    top = 1
    for i in range(n):
        target = (target * HASH_BASE + needle[i] + 1) % HASH_MODULUS
        window = (window * HASH_BASE + haystack[start + i] + 1) % HASH_MODULUS
        if i > 0:
            top = (top * HASH_BASE) % HASH_MODULUS
    i = start
    while True:
        if window == target:
            match = True
            for j in range(n):
                if haystack[i + j] != needle[j]:
                    match = False
                    break
            if match:
                return i
        if i == last:
            return -1
        out_term = ((haystack[i] + 1) * top) % HASH_MODULUS
        window = (window - out_term) % HASH_MODULUS
        window = (window * HASH_BASE + haystack[i + n] + 1) % HASH_MODULUS
        i += 1


def as_symbols(values):
    """Symbols as a contiguous int64 array, the dtype the kernels expect."""
    return np.ascontiguousarray(values, dtype=np.int64)
