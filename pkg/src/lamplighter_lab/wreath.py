"""The lamplighter walk on Z_2 wr G.

A state is a lamp configuration ``f`` (bit ``v`` is the lamp at vertex
``v``) together with the lamplighter position ``x``; its flat index is
``x * 2**|G| + f``.  One step randomizes the lamp under the lamplighter,
moves the lamplighter by the base kernel, then randomizes the lamp at the
new position.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np
import scipy.sparse as sp

from .errors import BudgetExceeded
from .graphs import Distribution, WalkKernel
from .rng import CounterStream, categorical, cumulative_rows, draw_u64, draw_uniform, stream_key

DEFAULT_STATE_BUDGET = 1 << 22


@dataclass(frozen=True)
class WreathState:
    lamps: int
    position: int
    size: int

    def __post_init__(self):
        if not 0 <= self.position < self.size or self.lamps >> self.size:
            raise ValueError(f"invalid wreath state for |G|={self.size}")

    def lamp(self, v: int) -> int:
        return (self.lamps >> v) & 1

    def __str__(self):
        return "".join(str(self.lamp(v)) for v in range(self.size)) + f"@{self.position}"


@dataclass(frozen=True)
class WreathIndexing:
    base_size: int

    @property
    def total(self) -> int:
        return self.base_size << self.base_size

    def encode(self, s: WreathState) -> int:
        return (s.position << self.base_size) | s.lamps

    def decode(self, index: int) -> WreathState:
        if not 0 <= index < self.total:
            raise IndexError(index)
        return WreathState(index & ((1 << self.base_size) - 1), index >> self.base_size, self.base_size)


def wreath_stationary(base: WalkKernel) -> Distribution:
    n = base.n
    return Distribution(np.repeat(base.stationary, 1 << n) / float(1 << n))


def wreath_kernel(base: WalkKernel, budget: int = DEFAULT_STATE_BUDGET) -> WalkKernel:
    """Explicit sparse kernel of the lamplighter walk over ``base``.

    For a != b the mass q(a, b) is split evenly over the four settings of
    the lamps at a and b; for a == b the mass q(a, a) is split over the two
    settings of the lamp at a.  All other lamps are untouched.
    """
    n = base.n
    size = 1 << n
    total = n * size
    if total > budget:
        raise BudgetExceeded(f"wreath over |G|={n} has {total} states > budget {budget}")
    configs = np.arange(size, dtype=np.int64)
    coo = base.matrix.tocoo()
    rows, cols, vals = [], [], []
    for a, b, q in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()):
        src = a * size + configs
        if a == b:
            cleared = configs & ~(1 << a)
            patterns = (0, 1 << a)
        else:
            cleared = configs & ~((1 << a) | (1 << b))
            patterns = (0, 1 << a, 1 << b, (1 << a) | (1 << b))
        share = q / len(patterns)
        for pat in patterns:
            rows.append(src)
            cols.append(b * size + (cleared | pat))
            vals.append(np.full(size, share))
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(total, total)
    )
    return WalkKernel(
        mat,
        wreath_stationary(base).probabilities,
        label=f"wreath[{base.label}]",
        reversible=base.reversible,
        transitive=base.transitive,
        meta={**base.meta, "wreath": True, "base_size": n},
    )


def wreath_step(base: WalkKernel, s: WreathState, rng: CounterStream) -> WreathState:
    """One randomize-move-randomize step; consumes three draws (bit, move, bit)."""
    lamps = s.lamps & ~(1 << s.position) | (rng.bit() << s.position)
    u = rng.random()
    targets = base.row(s.position)
    acc = 0.0
    y = targets[-1][0]
    for cand, p in targets:
        acc += p
        if u < acc:
            y = cand
            break
    lamps = lamps & ~(1 << y) | (rng.bit() << y)
    return WreathState(lamps, y, s.size)


@nb.njit(cache=True, nogil=True)
def _one_step_batch(indptr, indices, cum, n, lamps, pos, seed, count, out):
    for i in range(count):
        key = stream_key(np.uint64(seed), np.uint64(i), np.uint64(0))
        f = lamps
        b0 = np.int64(draw_u64(key, np.uint64(0)) >> np.uint64(63))
        f = (f & ~(np.int64(1) << pos)) | (b0 << pos)
        y = categorical(indptr, indices, cum, pos, draw_uniform(key, np.uint64(1)))
        b1 = np.int64(draw_u64(key, np.uint64(2)) >> np.uint64(63))
        f = (f & ~(np.int64(1) << y)) | (b1 << y)
        out[i] = (y << n) | f


def sample_one_step(base: WalkKernel, s: WreathState, count: int, seed: int) -> np.ndarray:
    """Flat indices of ``count`` independent one-step successors of ``s``.

    Step ``i`` uses stream ``(seed, i)`` with the same draw order as
    :func:`wreath_step`, so ``sample_one_step(...)[i]`` equals
    ``wreath_step(base, s, CounterStream(seed, i))`` encoded.
    """
    indptr, indices, cum = cumulative_rows(base.matrix)
    out = np.empty(count, dtype=np.int64)
    _one_step_batch(indptr, indices, cum, base.n, s.lamps, s.position, seed, count, out)
    return out
