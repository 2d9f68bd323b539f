"""Monte Carlo estimators with batch-means confidence intervals."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import binom

from ..errors import MissingBaseProfile, RecurrentDimension, UnreliableEstimate, WindowTooNarrow
from ..exact.cover import CoverDP, coupon_curve
from ..exact.profile import MixingProfile
from ..graphs import WalkKernel
from .sampler import TrajectoryBatch, returns_samples, sample_trajectories

DEFAULT_BATCHES = 32
SPREAD_LIMIT = 0.5


@dataclass(frozen=True)
class EstimateCI:
    value: float
    se: float
    n: int
    batches: int
    reliable: bool = True

    def zscore(self, exact: float) -> float:
        diff = self.value - exact
        if self.se == 0:
            return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(exact)) else math.copysign(math.inf, diff)
        return diff / self.se

    def within(self, exact: float, sigmas: float = 3.0) -> bool:
        return abs(self.zscore(exact)) <= sigmas

    def shifted(self, offset: float) -> "EstimateCI":
        return EstimateCI(self.value + offset, self.se, self.n, self.batches, self.reliable)

    def as_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "n": self.n, "batches": self.batches,
                "reliable": self.reliable}


def batch_means(samples, batches: int = DEFAULT_BATCHES) -> EstimateCI:
    """Point estimate and standard error from contiguous batch means.

    The estimate is flagged unreliable when the batch means spread by more
    than half the point estimate, the signature of a few huge samples.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("no samples")
    b = max(1, min(batches, n))
    edges = (np.arange(b + 1) * n) // b
    means = np.add.reduceat(x, edges[:-1]) / np.diff(edges)
    value = float(x.mean())
    if b < 2:
        return EstimateCI(value, 0.0, n, b, reliable=bool(np.all(x == x[0])))
    sd = float(means.std(ddof=1))
    spread = sd / abs(value) if value != 0 else (0.0 if sd == 0 else math.inf)
    return EstimateCI(value, sd / math.sqrt(b), n, b, reliable=spread <= SPREAD_LIMIT)


def write_batch_csv(path, statistics: Mapping[str, np.ndarray], batches: int = DEFAULT_BATCHES) -> None:
    """Per-batch means as ``batch,statistic,value`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["batch", "statistic", "value"])
        for name, samples in statistics.items():
            x = np.asarray(samples, dtype=float)
            b = max(1, min(batches, x.size))
            edges = (np.arange(b + 1) * x.size) // b
            for i in range(b):
                w.writerow([i, name, repr(float(x[edges[i]:edges[i + 1]].mean()))])


# -- uncovered-set exponential moment ------------------------------------------------

def mgf_samples(batch: TrajectoryBatch, t: int) -> np.ndarray:
    unc = batch.uncovered_at(t)
    if np.any(unc < 0):
        raise ValueError(f"time {t} is beyond the horizon of some trajectories")
    return np.exp2(unc.astype(float))


def uncovered_mgf_mc(base: WalkKernel, start: int, t: int, N: int, seed: int,
                     batches: int = DEFAULT_BATCHES, workers: int = 1) -> EstimateCI:
    """``E 2^{|S_t|}`` by simulation."""
    batch = sample_trajectories(base, start, horizon=t, N=N, master_seed=seed, probe_times=[t],
                                workers=workers)
    return batch_means(mgf_samples(batch, t), batches)


MgfSource = Callable[[int], EstimateCI]


def mgf_source_mc(base: WalkKernel, start: int, horizon: int, N: int, seed: int,
                  batches: int = DEFAULT_BATCHES, workers: int = 1) -> MgfSource:
    """MC curve over common random numbers: every t reuses the same trajectories."""
    batch = sample_trajectories(base, start, horizon=horizon, N=N, master_seed=seed, keep_discovery=True,
                                workers=workers)
    return lambda t: batch_means(mgf_samples(batch, t), batches)


def mgf_source_dp(dp: CoverDP) -> MgfSource:
    return lambda t: EstimateCI(dp.mgf(t), 0.0, 0, 0)


def mgf_source_lumped(n: int, horizon: int) -> MgfSource:
    curve = coupon_curve(n, horizon=horizon)
    values = curve.mgf

    def source(t):
        return EstimateCI(float(values[min(t, values.size - 1)]), 0.0, 0, 0)
    return source


@dataclass(frozen=True)
class ThresholdEstimate:
    time: int
    lower: int
    upper: int


def _least(pred: Callable[[int], bool], lo: int, hi: int) -> int:
    """Least t in [lo, hi] with pred(t), assuming pred is monotone and pred(hi)."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def uniform_time_from_mgf(source: MgfSource, eps: float, window: tuple[int, int],
                          band: float = 2.0) -> ThresholdEstimate:
    """``inf{t : E 2^{|S_t|} <= 1 + eps}`` by bisection inside ``window``.

    ``lower``/``upper`` repeat the search on the estimate shifted by
    ``-/+ band`` standard errors.
    """
    lo, hi = window
    level = 1.0 + eps
    left, right = source(lo), source(hi)
    if not (left.reliable and right.reliable):
        raise UnreliableEstimate(f"MGF estimate at the window ends is unreliable ({lo}, {hi})")
    if left.value <= level:
        if lo == 0:
            return ThresholdEstimate(0, 0, 0)
        raise WindowTooNarrow(f"E2^|S| already {left.value:.4g} <= {level:.4g} at t={lo}")
    if right.value > level:
        raise WindowTooNarrow(f"E2^|S| still {right.value:.4g} > {level:.4g} at t={hi}")
    cache: dict[int, EstimateCI] = {lo: left, hi: right}

    def est(t):
        if t not in cache:
            cache[t] = source(t)
            if not cache[t].reliable:
                raise UnreliableEstimate(f"MGF estimate at t={t} is dominated by rare samples")
        return cache[t]

    t0 = _least(lambda t: est(t).value <= level, lo, hi)
    t_lo = _least(lambda t: est(t).value - band * est(t).se <= level, lo, hi)
    t_hi = _least(lambda t: est(t).value + band * est(t).se <= level, lo, hi) \
        if right.value + band * right.se <= level else hi
    return ThresholdEstimate(t0, min(t_lo, t0), max(t_hi, t0))


# -- total-variation bounds on the lamplighter graph ------------------------------------

def zero_threshold(n: int, K: float) -> float:
    return n / 2.0 + K * math.sqrt(n)


def stationary_zero_tail(n: int, K: float) -> float:
    """``P(Binomial(n, 1/2) > n/2 + K sqrt(n))``."""
    return float(binom.sf(math.floor(zero_threshold(n, K)), n, 0.5))


def zero_tail_samples(batch: TrajectoryBatch, t: int, K: float, rao_blackwell: bool = True) -> np.ndarray:
    """Per-trajectory estimates of ``P(#zero lamps > n/2 + K sqrt(n))`` at time ``t``.

    With ``rao_blackwell`` the fair lamp bits on the visited set are
    integrated out exactly given ``|S_t|``; otherwise the sampled zero
    count is thresholded.
    """
    n = batch.n
    cut = math.floor(zero_threshold(n, K))
    i = batch.probe_index(t)
    if np.any(batch.uncovered[:, i] < 0):
        raise ValueError(f"time {t} is beyond the horizon of some trajectories")
    if t == 0:
        return np.full(len(batch), float(n > cut))
    if not rao_blackwell:
        return (batch.zero_lamps[:, i] > cut).astype(float)
    u = np.arange(n + 1)
    table = binom.sf(cut - u, n - u, 0.5)
    return table[batch.uncovered[:, i]]


def tv_lower_from_batch(batch: TrajectoryBatch, t: int, K: float = 1.0, batches: int = DEFAULT_BATCHES,
                        rao_blackwell: bool = True) -> EstimateCI:
    est = batch_means(zero_tail_samples(batch, t, K, rao_blackwell), batches)
    return est.shifted(-stationary_zero_tail(batch.n, K))


def tv_lower_zero_count(base: WalkKernel, t: int, N: int, K: float = 1.0, seed: int = 0, start: int = 0,
                        batches: int = DEFAULT_BATCHES, rao_blackwell: bool = True,
                        workers: int = 1) -> EstimateCI:
    """Lower bound on TV(p^t(id, .), mu) on the lamplighter graph from the zero-lamp count."""
    if K <= 0:
        raise ValueError("K must be positive")
    batch = sample_trajectories(base, start, horizon=t, N=N, master_seed=seed, probe_times=[t],
                                workers=workers)
    return tv_lower_from_batch(batch, t, K, batches, rao_blackwell)


def base_tv_at(profile: Optional[MixingProfile | Sequence[float]], s: int) -> float:
    if profile is None:
        raise MissingBaseProfile("an exact base TV profile is required")
    tv = profile.tv if isinstance(profile, MixingProfile) else np.asarray(profile, dtype=float)
    # tv is nonincreasing, so the last computed value bounds everything after it
    return float(tv[min(s, tv.size - 1)])


def tv_upper_from_batch(batch: TrajectoryBatch, t: int, k: int, base_profile,
                        batches: int = DEFAULT_BATCHES) -> EstimateCI:
    if k < 0:
        raise ValueError("k must be >= 0")
    d_base = base_tv_at(base_profile, k + 1)
    cover = batch.cover_times
    late = (cover < 0) | (cover + k >= t)
    return batch_means(late.astype(float), batches).shifted(d_base)


def tv_upper_cover(base: WalkKernel, t: int, k: int, N: int, seed: int, base_profile,
                   start: int = 0, batches: int = DEFAULT_BATCHES, workers: int = 1) -> EstimateCI:
    """``P(C + k >= t) + d_base(k + 1)``, an upper bound on TV from the all-off state."""
    if base_profile is None:
        raise MissingBaseProfile("an exact base TV profile is required")
    batch = sample_trajectories(base, start, horizon=max(t, 1), N=N, master_seed=seed, workers=workers)
    return tv_upper_from_batch(batch, t, k, base_profile, batches)


def returns_to_origin(d: int, horizon: int, N: int, seed: int, batches: int = DEFAULT_BATCHES,
                      workers: int = 1) -> EstimateCI:
    """Mean visits to 0 (time 0 included) of the lazy walk on Z^d up to ``horizon``.

    Truncation biases the estimate low by the expected visits after
    ``horizon``, which is O(horizon^{1 - d/2}).
    """
    if d <= 2:
        raise RecurrentDimension(f"the walk on Z^{d} is recurrent")
    return batch_means(returns_samples(d, horizon, N, seed, workers), batches)
