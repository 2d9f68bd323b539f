"""Exact cover-time laws.

``cover_dp`` tracks the joint law of (position, visited set) over the states
reachable from the start, as a sparse chain.  For the complete graph with
loops the uncovered count alone is Markov (coupon collector), which the
``coupon_*`` functions exploit for n in the thousands; single MGF values
have a closed form that reaches n = 10^6.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln, logsumexp

from ..errors import BudgetExceeded
from ..graphs import WalkKernel

SUBSET_BUDGET = 22
REACHABLE_BUDGET = 4_000_000
DEFAULT_TOL = 1e-12


@dataclass
class CoverDP:
    """Exact law of the uncovered count ``|S_t|`` for t = 0..horizon.

    ``uncovered[t, j] = P(|S_t| = j)``.  Beyond the horizon the remaining
    mass is below the construction tolerance and is extrapolated
    geometrically where an expectation needs it.
    """

    n: int
    start: int
    uncovered: np.ndarray
    label: str = ""

    @property
    def horizon(self) -> int:
        return self.uncovered.shape[0] - 1

    def _row(self, t: int) -> np.ndarray:
        if t < 0:
            raise ValueError("t must be >= 0")
        if t > self.horizon:
            out = np.zeros(self.n)
            out[0] = 1.0
            return out
        return self.uncovered[t]

    def mgf(self, t: int) -> float:
        """``E 2^{|S_t|}``."""
        return float(self._row(t) @ np.exp2(np.arange(self.n)))

    def mgf_curve(self) -> np.ndarray:
        return self.uncovered @ np.exp2(np.arange(self.n))

    def partial_survival(self, k: int, t: int) -> float:
        """``P(C(k) > t) = P(|S_t| > k)``; ``k = 0`` is the cover time."""
        return float(self._row(t)[k + 1:].sum())

    def cover_survival(self, t: int) -> float:
        return self.partial_survival(0, t)

    def survival_curve(self, k: int = 0) -> np.ndarray:
        return self.uncovered[:, k + 1:].sum(axis=1)

    def _tail(self, s: np.ndarray) -> float:
        if s.size < 2 or s[-1] <= 0 or s[-2] <= 0:
            return 0.0
        r = s[-1] / s[-2]
        return float(s[-1] * r / (1.0 - r)) if r < 1 else math.inf

    def expected_partial(self, k: int) -> float:
        """``E C(k) = sum_t P(C(k) > t)``, geometric extrapolation past the horizon."""
        if k >= self.n - 1:
            return 0.0
        s = self.survival_curve(k)
        return float(s.sum()) + self._tail(s)

    @property
    def expected_cover(self) -> float:
        return self.expected_partial(0)

    @property
    def truncation_error(self) -> float:
        return self._tail(self.survival_curve(0))

    def cover_cdf(self) -> np.ndarray:
        return 1.0 - self.survival_curve(0)


def _reachable_chain(base: WalkKernel, start: int):
    n = base.n
    full = (1 << n) - 1
    rows = [base.row(x) for x in range(n)]
    first = (start << n) | (1 << start)
    index = {first: 0}
    keys = [first]
    src, dst, val = [], [], []
    queue = deque([first])
    while queue:
        key = queue.popleft()
        i = index[key]
        x, seen = key >> n, key & full
        for y, q in rows[x]:
            nk = (y << n) | seen | (1 << y)
            j = index.get(nk)
            if j is None:
                j = index[nk] = len(keys)
                keys.append(nk)
                queue.append(nk)
                if len(keys) > REACHABLE_BUDGET:
                    raise BudgetExceeded(f"more than {REACHABLE_BUDGET} reachable cover states")
            src.append(i)
            dst.append(j)
            val.append(q)
    m = len(keys)
    step = sp.csr_matrix((val, (dst, src)), shape=(m, m))  # column-stochastic: d' = step @ d
    masks = np.fromiter((k & full for k in keys), dtype=np.int64, count=m)
    uncovered = n - np.fromiter((bin(int(s)).count("1") for s in masks), dtype=np.int64, count=m)
    return step, uncovered


def cover_dp(base: WalkKernel, start: int = 0, tol: float = DEFAULT_TOL,
             max_horizon: int = 10_000_000) -> CoverDP:
    """Exact cover-time DP; the start counts as visited at t = 0.

    Iterates until ``E 2^{|S_t|} - 1 < tol``, which also bounds the mass
    not yet covered.
    """
    n = base.n
    if n > SUBSET_BUDGET:
        raise BudgetExceeded(f"|G|={n} exceeds subset-DP budget {SUBSET_BUDGET}")
    step, unc = _reachable_chain(base, start)
    d = np.zeros(step.shape[0])
    d[0] = 1.0
    weights = np.exp2(np.arange(n)) - 1.0
    out = [np.bincount(unc, weights=d, minlength=n)]
    t = 0
    while out[-1] @ weights >= tol and t < max_horizon:
        d = step @ d
        t += 1
        row = np.bincount(unc, weights=d, minlength=n)
        if abs(row.sum() - 1.0) > 1e-9 * t:
            raise RuntimeError(f"cover DP lost mass at t={t}: {row.sum()!r}")
        out.append(row)
    return CoverDP(n, start, np.array(out), label=base.label)


def matthews_gap(dp: CoverDP, k: int, t_star: float) -> tuple[float, float]:
    """``(E[C - C(k)], t* (ln k + 1))``; the bound is 0 for ``k = 0``."""
    gap = dp.expected_cover - dp.expected_partial(k)
    bound = 0.0 if k == 0 else t_star * (math.log(k) + 1.0)
    return gap, bound


# -- complete graph with loops: the lumped chain --------------------------------

def _lumped_step(p: np.ndarray, n: int, down: np.ndarray) -> np.ndarray:
    # uncovered i -> i-1 with probability i/n
    out = p * (1.0 - down)
    out[:-1] += p[1:] * down[1:]
    return out


def lumped_cover_dp(n: int, tol: float = DEFAULT_TOL, max_horizon: int = 10_000_000) -> CoverDP:
    """``cover_dp`` for ``complete_with_loops(n)`` computed on the lumped chain."""
    down = np.arange(n) / n
    p = np.zeros(n)
    p[n - 1] = 1.0
    weights = np.exp2(np.arange(n)) - 1.0
    out = [p]
    while out[-1] @ weights >= tol and len(out) <= max_horizon:
        out.append(_lumped_step(out[-1], n, down))
    return CoverDP(n, 0, np.array(out), label=f"complete_with_loops({n}) lumped")


@dataclass
class CouponCurve:
    """``E 2^{|S_t|}`` (kept as a logarithm) and ``P(C <= t)`` for t = 0..horizon."""

    n: int
    log_mgf: np.ndarray
    cover_cdf: np.ndarray

    @property
    def mgf(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_mgf)

    def continuous(self, t) -> np.ndarray:
        """Continuous-time reference ``[1 + exp(-t/n)]^{n-1}``."""
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp((self.n - 1) * np.log1p(np.exp(-t / self.n)))


def coupon_curve(n: int, horizon: int | None = None, stop_eps: float | None = None) -> CouponCurve:
    """Iterate the lumped chain up to ``horizon`` or until ``E 2^{|S_t|} <= 1 + stop_eps``.

    ``p_i 2^i`` is carried with a running log-scale so n in the thousands
    does not overflow.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if horizon is None and stop_eps is None:
        raise ValueError("need a horizon or a stopping level")
    down = np.arange(n) / n
    p = np.zeros(n)
    p[n - 1] = 1.0
    w = np.zeros(n)
    w[n - 1] = 1.0
    log_scale = (n - 1) * math.log(2.0)
    log_mgf, cdf = [log_scale], [p[0]]
    stop = math.log1p(stop_eps) if stop_eps is not None else -math.inf
    t = 0
    while (horizon is None or t < horizon) and log_mgf[-1] > stop:
        p = _lumped_step(p, n, down)
        nw = w * (1.0 - down)
        nw[:-1] += 0.5 * w[1:] * down[1:]
        s = nw.max()
        w = nw / s
        log_scale += math.log(s)
        t += 1
        log_mgf.append(log_scale + math.log(w.sum()))
        cdf.append(p[0])
    return CouponCurve(n, np.array(log_mgf), np.array(cdf))


@dataclass(frozen=True)
class CouponResult:
    mgf: float
    cover_cdf: float
    continuous: float


LUMPED_WORK_BUDGET = 400_000_000


def coupon_log_mgf(n: int, t: int) -> float:
    """``log E 2^{|S_t|} = log sum_j C(n-1, j) (1 - j/n)^t``, O(n) and free of cancellation.

    Each ``j``-subset of the unvisited sites is missed by all t uniform
    draws with probability ``(1 - j/n)^t``.
    """
    j = np.arange(n)
    with np.errstate(divide="ignore"):
        terms = (gammaln(n) - gammaln(j + 1) - gammaln(n - j)) + t * np.log1p(-j / n)
    return float(logsumexp(terms))


def coupon_mgf(n: int, t: int) -> CouponResult:
    """Exact ``E 2^{|S_t|}`` on ``complete_with_loops(n)`` with the cover CDF and continuous-time value.

    The cover CDF needs the lumped chain, so it is NaN when ``n * t`` exceeds
    ``LUMPED_WORK_BUDGET``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    cdf = math.nan
    if n * t <= LUMPED_WORK_BUDGET:
        cdf = float(coupon_curve(n, horizon=t).cover_cdf[t])
    cont = _exp((n - 1) * math.log1p(math.exp(-t / n)))
    return CouponResult(_exp(coupon_log_mgf(n, t)), cdf, cont)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def coupon_threshold(n: int, eps: float) -> int:
    """Least t with ``E 2^{|S_t|} <= 1 + eps`` on the lumped chain."""
    curve = coupon_curve(n, stop_eps=eps)
    return int(np.flatnonzero(curve.log_mgf <= math.log1p(eps))[0])


def coupon_expected_gap(n: int, k: int) -> float:
    """``E[C - C(k)] = n H_k`` on the lumped chain (``C(k) = 0`` once ``k >= n-1``)."""
    k = min(k, n - 1)
    return float(n * sum(1.0 / i for i in range(1, k + 1)))
