"""Exact distance-to-stationarity profiles by iterating start rows."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import BudgetExceeded, HorizonTooShort
from ..graphs import WalkKernel

PROFILE_BUDGET = 1 << 16
ALL_STARTS_BUDGET = 6000
DEFAULT_EPS = 1.0 / (2.0 * math.e)
METRICS = ("tv", "sep", "unif")


@dataclass
class MixingProfile:
    """Worst-start distances at t = 0..horizon.

    ``tv`` is total variation, ``sep`` separation ``1 - min p^t/mu`` and
    ``unif`` the largest relative deviation ``|p^t/mu - 1|``.
    """

    tv: np.ndarray
    sep: np.ndarray
    unif: np.ndarray
    starts: tuple[int, ...] = field(default=(0,))

    @property
    def horizon(self) -> int:
        return self.tv.size - 1

    def metric(self, name: str) -> np.ndarray:
        if name not in METRICS:
            raise ValueError(f"unknown metric {name!r}")
        return getattr(self, name)


def _distances(d: np.ndarray, mu: np.ndarray) -> tuple[float, float, float]:
    ratio = d / mu
    tv = 0.5 * float(np.max(np.abs(d - mu).sum(axis=-1)))
    sep = float(np.max(1.0 - ratio.min(axis=-1)))
    unif = float(np.max(np.abs(ratio - 1.0)))
    return tv, sep, unif


def mixing_profile(k: WalkKernel, horizon: int, starts: Optional[Sequence[int]] = None,
                   budget: int = PROFILE_BUDGET, stop_metric: Optional[str] = None,
                   stop_eps: float = DEFAULT_EPS) -> MixingProfile:
    """Exact profile up to ``horizon`` steps.

    Kernels attested transitive are started from state 0 only; otherwise
    every state is a start (feasible up to ``ALL_STARTS_BUDGET`` states).
    With ``stop_metric`` set, iteration ends early once that metric drops
    to ``stop_eps``.
    """
    n = k.n
    if n > budget:
        raise BudgetExceeded(f"{n} states exceeds profile budget {budget}")
    if starts is None:
        if k.transitive:
            starts = (0,)
        elif n <= ALL_STARTS_BUDGET:
            starts = tuple(range(n))
        else:
            raise BudgetExceeded(f"worst-start profile over {n} states needs a transitivity attestation")
    starts = tuple(int(s) for s in starts)
    mu = k.stationary
    pt = k.matrix.T.tocsr()
    d = np.zeros((n, len(starts)))
    d[list(starts), np.arange(len(starts))] = 1.0
    rows = [_distances(d.T, mu)]
    for _ in range(horizon):
        d = pt @ d
        rows.append(_distances(d.T, mu))
        if stop_metric is not None and rows[-1][METRICS.index(stop_metric)] <= stop_eps:
            break
    arr = np.array(rows)
    return MixingProfile(arr[:, 0], arr[:, 1], arr[:, 2], starts)


def mixing_time(profile: MixingProfile, eps: float = DEFAULT_EPS, metric: str = "tv") -> int:
    """Least ``t`` with the chosen distance at most ``eps``."""
    values = profile.metric(metric)
    hit = np.flatnonzero(values <= eps)
    if hit.size == 0:
        raise HorizonTooShort(f"{metric} still {values[-1]:.4g} > {eps:.4g} at t={profile.horizon}")
    return int(hit[0])


def mixing_time_exact(k: WalkKernel, eps: float = DEFAULT_EPS, metric: str = "tv",
                      max_horizon: int = 1_000_000, **kw) -> tuple[int, MixingProfile]:
    """Run the profile just far enough to read off the ``eps`` mixing time."""
    prof = mixing_profile(k, max_horizon, stop_metric=metric, stop_eps=eps, **kw)
    return mixing_time(prof, eps, metric), prof
