"""Trajectory sampler for the projected lamplighter walk.

Only the lamplighter path is simulated.  Given the path, the lamps at time
``t >= 1`` are independent fair bits on the visited set and zero elsewhere,
so every lamp observable is drawn (or integrated) from the visited set.

Trajectory ``i`` uses counter stream ``(master_seed, i)``; workers fill
disjoint index ranges of preallocated arrays, which makes every aggregate
independent of the worker count.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numba as nb
import numpy as np

from ..errors import WrongFamily
from ..graphs import WalkKernel
from ..rng import LAMP_DOMAIN, WALK_DOMAIN, categorical, cumulative_rows, draw_u64, draw_uniform, stream_key

log = logging.getLogger(__name__)

_M55 = np.uint64(0x5555555555555555)
_M33 = np.uint64(0x3333333333333333)
_M0F = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@nb.njit(cache=True, nogil=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & _M55)
    x = (x & _M33) + ((x >> np.uint64(2)) & _M33)
    x = (x + (x >> np.uint64(4))) & _M0F
    return np.int64((x * _H01) >> np.uint64(56))


@nb.njit(cache=True, nogil=True)
def _fair_binomial(key, counter, m):
    """Bin(m, 1/2) from ceil(m/64) draws starting at ``counter``."""
    total = 0
    c = counter
    while m > 0:
        word = draw_u64(key, np.uint64(c))
        if m < 64:
            word = word & ((np.uint64(1) << np.uint64(m)) - np.uint64(1))
        total += _popcount(word)
        m -= 64
        c += 1
    return total


@nb.njit(cache=True, nogil=True)
def uncovered_ball_radius(visited, side, dist, queue):
    """Largest r such that some L-infinity ball of radius r on the torus avoids ``visited``.

    Multi-source BFS over the 8-neighbourhood gives the Chebyshev distance
    to the visited set; returns 0 when nothing is uncovered.
    """
    m = side * side
    head = 0
    tail = 0
    for v in range(m):
        if visited[v]:
            dist[v] = 0
            queue[tail] = v
            tail += 1
        else:
            dist[v] = -1
    if tail == m:
        return 0
    best = 0
    while head < tail:
        v = queue[head]
        head += 1
        x = v % side
        y = v // side
        for dx in range(-1, 2):
            for dy in range(-1, 2):
                if dx == 0 and dy == 0:
                    continue
                w = (x + dx) % side + ((y + dy) % side) * side
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    if dist[w] > best:
                        best = dist[w]
                    queue[tail] = w
                    tail += 1
    return best - 1


@nb.njit(cache=True, nogil=True)
def _simulate(indptr, indices, cum, start, horizon, seed, first, count, probes, ks, side,
              keep_disc, disc_out, cover_out, end_out, partial_out, unc_out, zero_out, ball_out):
    n = indptr.size - 1
    n_probe = probes.size
    words = (n + 63) // 64
    visited = np.zeros(n, np.uint8)
    disc = np.empty(n, np.int64)
    dist = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    for j in range(count):
        idx = np.uint64(first + j)
        key = stream_key(np.uint64(seed), idx, np.uint64(0))
        lamp_key = stream_key(np.uint64(seed), idx, np.uint64(1))
        visited[:] = 0
        pos = start
        visited[pos] = 1
        disc[0] = 0
        nvis = 1
        t = 0
        p = 0
        ctr = 0
        while True:
            while p < n_probe and probes[p] == t:
                unc = n - nvis
                unc_out[j, p] = unc
                if t == 0:
                    zero_out[j, p] = n
                else:
                    zero_out[j, p] = unc + _fair_binomial(lamp_key, p * words, nvis)
                if side > 0:
                    ball_out[j, p] = uncovered_ball_radius(visited, side, dist, queue)
                p += 1
            if nvis == n or t >= horizon:
                break
            pos = categorical(indptr, indices, cum, pos, draw_uniform(key, np.uint64(ctr)))
            ctr += 1
            t += 1
            if visited[pos] == 0:
                visited[pos] = 1
                disc[nvis] = t
                nvis += 1
        end_out[j] = pos
        if nvis == n:
            cover_out[j] = t
            while p < n_probe:
                unc_out[j, p] = 0
                zero_out[j, p] = _fair_binomial(lamp_key, p * words, n) if probes[p] > 0 else n
                if side > 0:
                    ball_out[j, p] = 0
                p += 1
        else:
            cover_out[j] = -1
            while p < n_probe:
                unc_out[j, p] = -1
                zero_out[j, p] = -1
                if side > 0:
                    ball_out[j, p] = -1
                p += 1
        for q in range(ks.size):
            k = ks[q]
            if k >= n - 1:
                partial_out[j, q] = 0
            elif n - 1 - k < nvis:
                partial_out[j, q] = disc[n - 1 - k]
            else:
                partial_out[j, q] = -1
        if keep_disc:
            for q in range(n):
                disc_out[j, q] = disc[q] if q < nvis else -1


@dataclass(frozen=True)
class TrajectoryObservables:
    """One trajectory.  ``-1`` marks values beyond a censored horizon."""

    cover_time: int
    partial_cover_times: dict
    endpoint: int
    uncovered: dict
    zero_lamps: dict
    ball_radius: dict


@dataclass
class TrajectoryBatch:
    """Observables of N trajectories as arrays indexed by trajectory."""

    n: int
    start: int
    horizon: int
    master_seed: int
    probe_times: np.ndarray
    partial_ks: np.ndarray
    cover_times: np.ndarray
    endpoints: np.ndarray
    partial: np.ndarray
    uncovered: np.ndarray
    zero_lamps: np.ndarray
    ball_radius: Optional[np.ndarray] = None
    discovery: Optional[np.ndarray] = None
    label: str = ""

    def __len__(self):
        return self.cover_times.size

    def __getitem__(self, i: int) -> TrajectoryObservables:
        times = self.probe_times.tolist()
        return TrajectoryObservables(
            int(self.cover_times[i]),
            dict(zip(self.partial_ks.tolist(), self.partial[i].tolist())),
            int(self.endpoints[i]),
            dict(zip(times, self.uncovered[i].tolist())),
            dict(zip(times, self.zero_lamps[i].tolist())),
            {} if self.ball_radius is None else dict(zip(times, self.ball_radius[i].tolist())),
        )

    def __iter__(self) -> Iterator[TrajectoryObservables]:
        return (self[i] for i in range(len(self)))

    @property
    def censored(self) -> int:
        return int(np.count_nonzero(self.cover_times < 0))

    def probe_index(self, t: int) -> int:
        hit = np.flatnonzero(self.probe_times == t)
        if hit.size == 0:
            raise KeyError(f"time {t} was not probed")
        return int(hit[0])

    def uncovered_at(self, t: int) -> np.ndarray:
        """``|S_t|`` per trajectory, from probes or from discovery times."""
        if np.any(self.probe_times == t):
            return self.uncovered[:, self.probe_index(t)]
        if self.discovery is None:
            raise KeyError(f"time {t} was not probed and discovery times were not kept")
        if t > self.horizon:
            raise ValueError("t beyond the simulated horizon")
        found = (self.discovery >= 0) & (self.discovery <= t)
        return self.n - found.sum(axis=1)

    def partial_cover(self, k: int) -> np.ndarray:
        hit = np.flatnonzero(self.partial_ks == k)
        if hit.size:
            return self.partial[:, hit[0]]
        if self.discovery is None:
            raise KeyError(f"k={k} was not requested")
        if k >= self.n - 1:
            return np.zeros(len(self), dtype=np.int64)
        return self.discovery[:, self.n - 1 - k]


def torus_side(base: WalkKernel) -> int:
    """Side length if ``base`` lives on a 2-d torus, else raise."""
    meta = base.meta or {}
    if meta.get("family") != "torus" or meta.get("wreath") or len(meta.get("params", ())) != 2 \
            or meta["params"][1] != 2:
        raise WrongFamily(f"{base.label} is not a walk on a 2-d torus")
    return int(meta["params"][0])


def sample_trajectories(base: WalkKernel, start: int = 0, horizon: int = 10**9, N: int = 1,
                        master_seed: int = 0, probe_times: Sequence[int] = (),
                        partial_ks: Sequence[int] = (), balls: bool = False,
                        keep_discovery: bool = False, workers: int = 1,
                        chunk: Optional[int] = None) -> TrajectoryBatch:
    """Simulate ``N`` trajectories from ``start`` until cover or ``horizon``.

    ``probe_times`` are the times at which the uncovered count, the sampled
    zero-lamp count and (with ``balls`` on a 2-d torus) the largest
    uncovered ball radius are recorded.  ``keep_discovery`` keeps the time
    each vertex was first visited, so any ``|S_t|`` or ``C(k)`` can be read
    back later.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n = base.n
    probes = np.unique(np.asarray(probe_times, dtype=np.int64))
    if probes.size and probes[0] < 0:
        raise ValueError("probe times must be >= 0")
    ks = np.asarray(partial_ks, dtype=np.int64)
    side = torus_side(base) if balls else 0
    indptr, indices, cum = cumulative_rows(base.matrix)

    cover = np.empty(N, np.int64)
    ends = np.empty(N, np.int64)
    partial = np.empty((N, ks.size), np.int64)
    unc = np.empty((N, probes.size), np.int64)
    zeros = np.empty((N, probes.size), np.int64)
    ball = np.empty((N, probes.size if balls else 0), np.int64)
    disc = np.empty((N, n) if keep_discovery else (N, 0), np.int64)

    if chunk is None:
        chunk = max(1, math.ceil(N / max(1, 4 * workers)))
    ranges = [(lo, min(N, lo + chunk)) for lo in range(0, N, chunk)]

    def run(r):
        lo, hi = r
        _simulate(indptr, indices, cum, start, horizon, np.uint64(master_seed), lo, hi - lo, probes, ks,
                  side, keep_discovery, disc[lo:hi], cover[lo:hi], ends[lo:hi], partial[lo:hi], unc[lo:hi],
                  zeros[lo:hi], ball[lo:hi])
        return hi

    if workers <= 1:
        for r in ranges:
            run(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for done in pool.map(run, ranges):
                log.debug("trajectories done: %d/%d", done, N)

    return TrajectoryBatch(
        n=n, start=start, horizon=horizon, master_seed=master_seed, probe_times=probes, partial_ks=ks,
        cover_times=cover, endpoints=ends, partial=partial, uncovered=unc, zero_lamps=zeros,
        ball_radius=ball if balls else None, discovery=disc if keep_discovery else None, label=base.label,
    )


def largest_uncovered_ball(base: WalkKernel, visited_mask) -> int:
    """Largest L-infinity ball radius inside the unvisited set of a 2-d torus walk."""
    side = torus_side(base)
    visited = np.asarray(visited_mask, dtype=np.uint8)
    if visited.size != side * side:
        raise ValueError("mask size does not match the torus")
    m = side * side
    return int(uncovered_ball_radius(visited, side, np.empty(m, np.int64), np.empty(m, np.int64)))


@nb.njit(cache=True, nogil=True)
def _returns(d, horizon, seed, first, count, out):
    coords = np.zeros(d, np.int64)
    for j in range(count):
        key = stream_key(np.uint64(seed), np.uint64(first + j), np.uint64(0))
        coords[:] = 0
        nonzero = 0
        visits = 1
        for t in range(horizon):
            u = draw_uniform(key, np.uint64(t))
            if u < 0.5:
                if nonzero == 0:
                    visits += 1
                continue
            m = int((u - 0.5) * 4 * d)
            if m >= 2 * d:
                m = 2 * d - 1
            axis = m // 2
            before = coords[axis]
            coords[axis] += 1 if m % 2 == 0 else -1
            if before == 0:
                nonzero += 1
            elif coords[axis] == 0:
                nonzero -= 1
            if nonzero == 0:
                visits += 1
        out[j] = visits


def returns_samples(d: int, horizon: int, N: int, seed: int, workers: int = 1) -> np.ndarray:
    """Visits to the origin (time 0 included) of the lazy walk on Z^d, per trajectory."""
    out = np.empty(N, np.int64)
    chunk = max(1, math.ceil(N / max(1, 4 * workers)))
    ranges = [(lo, min(N, lo + chunk)) for lo in range(0, N, chunk)]

    def run(r):
        lo, hi = r
        _returns(d, horizon, np.uint64(seed), lo, hi - lo, out[lo:hi])

    if workers <= 1:
        for r in ranges:
            run(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, ranges))
    return out
