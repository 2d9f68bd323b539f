"""Counter-based random streams.

Draw ``c`` of stream ``(seed, index)`` is a pure function of the three
integers: a SplitMix64 sequence keyed by a hash of ``(seed, index)``.  No
generator state crosses trajectory boundaries, so any partition of the
trajectories over workers reproduces the same numbers.
"""
from __future__ import annotations

import numba as nb
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0

#: domain tags keep the walk and lamp streams of one trajectory disjoint
WALK_DOMAIN = 0
LAMP_DOMAIN = 1


@nb.njit(nb.uint64(nb.uint64), cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nb.uint64(nb.uint64, nb.uint64, nb.uint64), cache=True, nogil=True)
def stream_key(seed, index, domain):
    k = mix64(seed + _GAMMA)
    k = mix64(k ^ (index * _GAMMA + _ONE))
    return mix64(k ^ (domain * _M1 + _GAMMA))


@nb.njit(nb.uint64(nb.uint64, nb.uint64), cache=True, nogil=True)
def draw_u64(key, counter):
    return mix64(key + (counter + _ONE) * _GAMMA)


@nb.njit(nb.float64(nb.uint64, nb.uint64), cache=True, nogil=True)
def draw_uniform(key, counter):
    return float(draw_u64(key, counter) >> _S11) * _INV53


class CounterStream:
    """Sequential view of one counter-based stream, for scalar Python use."""

    def __init__(self, seed: int, index: int = 0, domain: int = WALK_DOMAIN):
        self.key = stream_key(np.uint64(seed), np.uint64(index), np.uint64(domain))
        self.counter = 0

    def u64(self) -> int:
        v = draw_u64(self.key, np.uint64(self.counter))
        self.counter += 1
        return int(v)

    def random(self) -> float:
        v = draw_uniform(self.key, np.uint64(self.counter))
        self.counter += 1
        return v

    def bit(self) -> int:
        return self.u64() >> 63


def cumulative_rows(matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR arrays with per-row cumulative probabilities (last entry pinned to 1)."""
    indptr = matrix.indptr.astype(np.int64)
    indices = matrix.indices.astype(np.int64)
    cum = np.empty(matrix.nnz)
    for x in range(matrix.shape[0]):
        lo, hi = indptr[x], indptr[x + 1]
        cum[lo:hi] = np.cumsum(matrix.data[lo:hi])
        cum[hi - 1] = 1.0
    return indptr, indices, cum


@nb.njit(cache=True, nogil=True)
def categorical(indptr, indices, cum, x, u):
    lo = indptr[x]
    hi = indptr[x + 1] - 1
    while lo < hi and cum[lo] <= u:
        lo += 1
    return indices[lo]
