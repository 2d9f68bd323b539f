"""Named experiments binding the exact and Monte Carlo engines into reports.

Inequalities that hold at every finite size are checked as assertions;
anything that is only true asymptotically is stored as a record with the
desk-scale band it is compared against.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BudgetExceeded, InvalidSpec
from .exact import (coupon_curve, coupon_expected_gap, cover_dp, hitting_times, matthews_gap, mixing_time_exact,
                    return_tails, spectrum)
from .exact.profile import DEFAULT_EPS
from .graphs import build_graph, lazy_kernel, torus
from .montecarlo import (EstimateCI, batch_means, mgf_source_dp, mgf_source_mc, sample_trajectories,
                         tv_lower_from_batch, tv_upper_from_batch, uniform_time_from_mgf)
from .montecarlo.estimators import base_tv_at
from .report import MixingReport
from .wreath import wreath_kernel

log = logging.getLogger(__name__)

SUITE = ("cycle:3", "cycle:4", "cycle:5", "cycle:6", "cycle:7", "cycle:8",
         "complete:3", "complete:4", "complete:5", "complete:6", "torus:3,2", "hypercube:3")
EXACT_WREATH_MAX = 9
ONE_D_CONSTANTS = (32 * math.log(2) / (27 * math.pi ** 2), 64 * math.log(2) / (27 * math.pi ** 2))
TORUS_TV_CONSTANT = 8 / math.pi


@dataclass
class ExperimentSpec:
    name: str
    seed: int
    graphs: Optional[list] = None
    sizes: Optional[list] = None
    eps: float = DEFAULT_EPS
    mgf_eps: float = 0.5
    N: Optional[int] = None
    K: float = 1.0
    degree: int = 4
    ks: list = field(default_factory=lambda: [2, 3])
    grid: int = 200
    budgets: dict = field(default_factory=dict)
    out: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.seed is None:
            raise InvalidSpec("seed is mandatory")
        self.seed = int(self.seed)
        if not 0 < self.eps < 1:
            raise InvalidSpec("eps must lie in (0, 1)")

    def public(self) -> dict:
        """Everything that determines the result (output location and worker count do not)."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        return d


def _graphs(spec: ExperimentSpec, default=SUITE, max_size: Optional[int] = None):
    out = []
    for s in (default if spec.graphs is None else spec.graphs):
        g = build_graph(s)
        if max_size is not None and g.n > max_size:
            raise BudgetExceeded(f"{g.tag}: |G|={g.n} outside the envelope |G| <= {max_size} of '{spec.name}'")
        out.append(g)
    return out


# -- relaxation time --------------------------------------------------------------

def run_thm2_sandwich(spec: ExperimentSpec) -> MixingReport:
    """Relaxation time of the lamplighter walk against the base maximal hitting time."""
    rep = MixingReport("thm2", spec.public())
    for g in _graphs(spec, max_size=EXACT_WREATH_MAX):
        base = lazy_kernel(g)
        t_star = hitting_times(base).t_star
        spec_w = spectrum(wreath_kernel(base))
        inst = rep.instance(g.tag)
        inst.exact("t_star", t_star)
        inst.exact("T_rel_wreath", spec_w.t_rel)
        inst.exact("t_rel_log_wreath", spec_w.t_rel_log)
        inst.exact("lambda2_wreath", spec_w.lambda2)
        inst.exact("min_eigenvalue_wreath", float(spec_w.eigenvalues[-1]))
        inst.exact("T_rel_base", spectrum(base).t_rel)
        rep.check("reltime_lower", "relaxation time vs hitting time, variational lower half", g.tag,
                  "T_rel(G^)", spec_w.t_rel, ">=", "t*/(8 log 2)", t_star / (8 * math.log(2)))
        if spec_w.t_rel_log is not None:
            rep.check("reltime_upper", "relaxation time vs hitting time, coupling upper half", g.tag,
                      "1/(-log lambda2)", spec_w.t_rel_log, "<=", "2 t*/log 2", 2 * t_star / math.log(2))
        else:
            rep.record("reltime_upper_skipped", g.tag, spec_w.lambda2, note="lambda2 <= 0; upper half not defined")
        rep.record("T_rel_over_t_star", g.tag, spec_w.t_rel / t_star,
                   band=[1 / (8 * math.log(2)), 2 / math.log(2)],
                   note="ratio inside the asymptotic sandwich constants")
        rep.record("nonnegative_spectrum", g.tag, int(spec_w.eigenvalues[-1] >= -1e-12), band=[1, 1])
    return rep


# -- total variation -----------------------------------------------------------------

def _upper_crossing(cover: np.ndarray, k: int, d_base: float, eps: float) -> float:
    """Least t with ``P_hat(C + k >= t) + d_base <= eps``; inf if unreachable."""
    n = cover.size
    allowed = (eps - d_base) * n - np.count_nonzero(cover < 0)
    if allowed < 0:
        return math.inf
    done = np.sort(cover[cover >= 0])
    a = int(math.floor(allowed))
    if a >= done.size:
        return float(k)
    return float(done[done.size - a - 1] + 1 + k)


def torus_tv_bracket(n: int, N: int, seed: int, eps: float = DEFAULT_EPS, K: float = 1.0, grid: int = 200,
                     workers: int = 1, rep: Optional[MixingReport] = None) -> dict:
    """Bracket the TV mixing time of the lamplighter over torus(n, 2) between the two MC bounds."""
    base = lazy_kernel(torus(n, 2))
    scale = n ** 2 * math.log(n) ** 2
    k, bprof = mixing_time_exact(base, eps / 2)
    d_base = base_tv_at(bprof, k + 1)
    probes = np.unique(np.round(scale * np.linspace(0.01, 4.0, grid)).astype(np.int64))
    batch = sample_trajectories(base, 0, horizon=int(40 * scale), N=N, master_seed=seed, probe_times=probes,
                                workers=workers)
    lower = [tv_lower_from_batch(batch, int(t), K) for t in probes]
    upper = [tv_upper_from_batch(batch, int(t), k, bprof) for t in probes]
    above = [int(t) for t, est in zip(probes, lower) if est.value > eps]
    lower_cross = float(max(above)) if above else 0.0
    upper_cross = _upper_crossing(batch.cover_times, k, d_base, eps)
    cover = batch_means(np.where(batch.cover_times < 0, np.nan, batch.cover_times))
    out = {
        "n": n, "scale": scale, "k": k, "d_base": d_base, "lower_cross": lower_cross,
        "upper_cross": upper_cross, "censored": batch.censored, "cover": cover,
        "probes": probes, "lower": lower, "upper": upper,
    }
    if rep is not None:
        tag = f"torus({n},2)"
        inst = rep.instance(tag)
        inst.exact("base_T_v_half_eps", k)
        inst.exact("base_tv_at_k_plus_1", d_base)
        inst.mc("E_cover", cover)
        inst.exact("lower_crossing", lower_cross)
        inst.exact("upper_crossing", upper_cross)
        inst.exact("censored", batch.censored)
        worst = max(lo.value - up.value - 3 * math.hypot(lo.se, up.se) for lo, up in zip(lower, upper))
        rep.check("bound_ordering", "zero-count lower bound below cover-time upper bound at every probe", tag,
                  "max(lower - upper - 3 se)", worst, "<=", "0", 0.0)
        rep.check("crossing_order", "lower crossing does not exceed upper crossing", tag,
                  "lower_crossing", lower_cross, "<=", "upper_crossing", upper_cross)
        rep.curves[f"torus{n}_tv_bounds"] = {
            "t": probes.tolist(),
            "lower": [e.value for e in lower], "lower_se": [e.se for e in lower],
            "upper": [e.value for e in upper], "upper_se": [e.se for e in upper],
        }
    return out


def run_thm3_tv(spec: ExperimentSpec) -> MixingReport:
    """TV mixing of the lamplighter walk against the base cover time."""
    rep = MixingReport("thm3", spec.public())
    for g in _graphs(spec, max_size=EXACT_WREATH_MAX):
        base = lazy_kernel(g)
        tv_time, prof = mixing_time_exact(wreath_kernel(base), spec.eps)
        e_cover = cover_dp(base).expected_cover
        inst = rep.instance(g.tag)
        inst.exact("T_v_wreath", tv_time)
        inst.exact("E_cover", e_cover)
        rep.record("T_v_over_E_cover", g.tag, tv_time / e_cover, note="finite-n ratio; the limit theory is asymptotic")
        rep.curves[f"{g.family}{'_'.join(map(str, g.params))}_wreath_tv"] = {
            "t": list(range(prof.horizon + 1)), "tv": prof.tv.tolist()}
    N = spec.N or 10_000
    mids = []
    sizes = spec.sizes if spec.sizes is not None else [16, 32, 48]
    for n in sizes:
        res = torus_tv_bracket(n, N, spec.seed, spec.eps, spec.K, spec.grid, spec.workers, rep)
        tag = f"torus({n},2)"
        lo_r = res["lower_cross"] / res["scale"]
        up_r = res["upper_cross"] / res["scale"]
        mid = 0.5 * (lo_r + up_r)
        mids.append(mid)
        rep.record("lower_crossing_ratio", tag, lo_r, band=[0.5, None] if n == 32 else None,
                   note="lower crossing / (n^2 log^2 n)")
        rep.record("upper_crossing_ratio", tag, up_r, band=[None, 6.0] if n == 32 else None,
                   note="upper crossing / (n^2 log^2 n)")
        rep.record("midpoint_ratio", tag, mid, note=f"asymptotic constant {TORUS_TV_CONSTANT:.6f}")
        rep.record("E_cover_ratio", tag, res["cover"].value / res["scale"], note="E C / (n^2 log^2 n)")
    if len(mids) >= 2:
        d = np.diff(mids)
        monotone = bool(np.all(d >= 0) or np.all(d <= 0))
        rep.record("midpoint_monotone", "torus sweep", int(monotone), band=[1, 1],
                   note="midpoint ratios " + ", ".join(f"{m:.4f}" for m in mids))
    return rep


# -- uniform mixing ---------------------------------------------------------------------

def _thin(x: np.ndarray, limit: int = 2000) -> np.ndarray:
    step = max(1, math.ceil(x.size / limit))
    idx = np.arange(0, x.size, step)
    if idx[-1] != x.size - 1:
        idx = np.append(idx, x.size - 1)
    return idx


def run_thm5_uniform(spec: ExperimentSpec) -> MixingReport:
    """Uniform mixing: exact small cases, the K_n threshold sweep, and the cycle(12) constant."""
    rep = MixingReport("thm5", spec.public())
    for g in _graphs(spec, default=("complete:2",) + SUITE, max_size=EXACT_WREATH_MAX):
        base = lazy_kernel(g)
        tau, prof = mixing_time_exact(wreath_kernel(base), spec.eps, metric="unif")
        t_rel = spectrum(base).t_rel
        t_v, _ = mixing_time_exact(base, spec.eps)
        low = g.n * (t_rel + math.log(g.n))
        high = g.n * (t_v + math.log(g.n))
        inst = rep.instance(g.tag)
        inst.exact("tau_wreath", tau)
        inst.exact("T_rel_base", t_rel)
        inst.exact("T_v_base", t_v)
        rep.record("tau_over_G_Trel_logG", g.tag, tau / low)
        rep.record("tau_over_G_Tv_logG", g.tag, tau / high)
        rep.curves[f"{g.family}{'_'.join(map(str, g.params))}_wreath_unif"] = {
            "t": list(range(prof.horizon + 1)), "unif": prof.unif.tolist(), "tv": prof.tv.tolist()}

    sizes = spec.sizes if spec.sizes is not None else [2 ** j for j in range(6, 13)]
    ratios = []
    for n in sizes:
        hi = int(math.ceil(3 * n * math.log(n))) + 4 * n
        curve = coupon_curve(n, horizon=hi)
        thr = uniform_time_from_mgf(lambda t, m=curve.mgf: EstimateCI(float(m[t]), 0.0, 0, 0), spec.mgf_eps,
                                    (0, hi))
        ratio = thr.time / (n * math.log(n))
        ratios.append(ratio)
        tag = f"complete_with_loops({n})"
        rep.instance(tag).exact("mgf_threshold", thr.time)
        rep.record("threshold_over_nlogn", tag, ratio)
        idx = _thin(np.arange(hi + 1))
        rep.curves[f"complete{n}_mgf"] = {"t": idx.tolist(), "mgf": curve.mgf[idx].tolist(),
                                          "mgf_continuous": curve.continuous(idx).tolist()}
    if ratios:
        rep.record("threshold_ratio_largest", f"complete_with_loops({sizes[-1]})", ratios[-1], band=[0.8, 1.2])
        dist = np.abs(np.array(ratios) - 1.0)
        rep.record("threshold_ratio_monotone", "complete sweep", int(bool(np.all(np.diff(dist) <= 0))),
                   band=[1, 1], note="|ratio - 1| nonincreasing: " + ", ".join(f"{r:.4f}" for r in ratios))

    n = 12
    base = lazy_kernel(build_graph(f"cycle:{n}"))
    dp = cover_dp(base)
    thr = uniform_time_from_mgf(mgf_source_dp(dp), spec.mgf_eps, (0, dp.horizon))
    tag = f"cycle({n})"
    rep.instance(tag).exact("mgf_threshold", thr.time)
    rep.record("threshold_over_n3", tag, thr.time / n ** 3,
               note="candidate constants " + ", ".join(f"{c:.4f}" for c in ONE_D_CONSTANTS))
    for label, c in zip(("short", "long"), ONE_D_CONSTANTS):
        rep.record(f"threshold_over_{label}_constant", tag, thr.time / (c * n ** 3), note=f"constant {c:.6f}")
    if spec.N:
        src = mgf_source_mc(base, 0, dp.horizon, spec.N, spec.seed, workers=spec.workers)
        mc = uniform_time_from_mgf(src, spec.mgf_eps, (0, dp.horizon))
        rep.instance(tag).exact("mgf_threshold_mc", mc.time)
        rep.record("mc_threshold_minus_exact", tag, mc.time - thr.time, band=[-1, 1])
    idx = _thin(np.arange(dp.horizon + 1))
    rep.curves[f"cycle{n}_mgf"] = {"t": idx.tolist(), "mgf": dp.mgf_curve()[idx].tolist()}
    return rep


# -- lemmas ------------------------------------------------------------------------------

def run_lemma_suite(spec: ExperimentSpec) -> MixingReport:
    """Return-time tail bound and the Matthews bound on the partial cover gap."""
    rep = MixingReport("lemmas", spec.public())
    for g in _graphs(spec):
        base = lazy_kernel(g)
        t_star = hitting_times(base).t_star
        m = g.n // 2
        tail = float(return_tails(base, m).min())
        inst = rep.instance(g.tag)
        inst.exact("t_star", t_star)
        inst.exact("min_return_tail", tail)
        rep.check("transience", "return-time tail on regular graphs", g.tag,
                  f"min_x P_x(T+ > {m})", tail, ">=", "|G|/(2t*)", g.n / (2 * t_star), slack=1e-8)
        dp = cover_dp(base)
        inst.exact("E_cover", dp.expected_cover)
        for k in spec.ks:
            gap, bound = matthews_gap(dp, k, t_star)
            inst.exact(f"cover_gap_k{k}", gap)
            rep.check(f"matthews_k{k}", "Matthews bound on covering the last k sites", g.tag,
                      f"E[C - C({k})]", gap, "<=", f"t*(ln {k} + 1)", bound, slack=1e-8)
            if g.family == "complete_with_loops":
                rep.check(f"lumped_gap_k{k}", "subset DP agrees with the lumped coupon chain", g.tag,
                          "DP gap", gap, "==", "n H_k", coupon_expected_gap(g.n, k), slack=1e-8)
    return rep


# -- expanders ------------------------------------------------------------------------------

def run_expander(spec: ExperimentSpec) -> MixingReport:
    """Random regular graphs: hitting time of order n, cover time of order n log n."""
    rep = MixingReport("expander", spec.public())
    sizes = spec.sizes if spec.sizes is not None else [64, 128, 256]
    N = spec.N or 2000
    hit, cov = {}, {}

    def measure(n, graph_seed):
        g = build_graph(f"regular:{n},{spec.degree},{graph_seed}")
        base = lazy_kernel(g)
        t_star = hitting_times(base, method="solve" if n <= 512 else "fundamental").t_star
        batch = sample_trajectories(base, 0, N=N, master_seed=spec.seed, workers=spec.workers)
        est = batch_means(batch.cover_times / (n * math.log(n)))
        inst = rep.instance(g.tag)
        inst.exact("t_star_over_n", t_star / n)
        inst.mc("E_cover_over_nlogn", est)
        return t_star / n, est.value

    for n in sizes:
        hit[n], cov[n] = measure(n, spec.seed)
    if len(sizes) >= 2:
        a, b = sizes[0], sizes[-1]
        rep.record("t_star_ratio_trend", f"n={b} vs n={a}", hit[b] / hit[a], band=[0.25, 4.0])
        rep.record("cover_ratio_trend", f"n={b} vs n={a}", cov[b] / cov[a], band=[0.25, 4.0])
    n0 = sizes[0]
    h2, c2 = measure(n0, spec.seed + 1)
    rep.record("two_seed_t_star", f"n={n0}", h2 / hit[n0], band=[2 / 3, 1.5])
    rep.record("two_seed_cover", f"n={n0}", c2 / cov[n0], band=[2 / 3, 1.5])
    return rep


# -- uncovered balls on the 2-d torus ----------------------------------------------------------

def run_zero_ball(spec: ExperimentSpec) -> MixingReport:
    """Largest all-off ball at 0.8 E C against its stationary expected count."""
    rep = MixingReport("zero_ball", spec.public())
    n = (spec.sizes or [64])[0]
    N = spec.N or 1000
    base = lazy_kernel(torus(n, 2))
    pilot = sample_trajectories(base, 0, N=N, master_seed=spec.seed, workers=spec.workers)
    e_cover = float(pilot.cover_times.mean())
    t80, t50 = int(round(0.8 * e_cover)), int(round(0.5 * e_cover))
    # same seed, same paths: the probes see the pilot trajectories
    batch = sample_trajectories(base, 0, N=N, master_seed=spec.seed, probe_times=[t50, t80], balls=True,
                                workers=spec.workers)
    radii = batch.ball_radius[:, batch.probe_index(t80)]
    tag = f"torus({n},2)"
    inst = rep.instance(tag)
    inst.mc("E_cover", batch_means(pilot.cover_times))
    inst.exact("t_probe", t80)
    values, counts = np.unique(radii, return_counts=True)
    stationary = float(n) ** 2 * np.exp2(-values.astype(float) ** 2)
    rep.curves[f"torus{n}_zero_ball"] = {"t": values.tolist(), "trajectories": counts.tolist(),
                                         "stationary_expected_balls": stationary.tolist()}
    rare = float(np.mean(float(n) ** 2 * np.exp2(-radii.astype(float) ** 2) < 0.01))
    rep.record("fraction_radius_stationary_below_0.01", tag, rare,
               note="share of trajectories whose all-off ball is unlikely (<0.01 expected) under stationarity")
    # an L-infinity ball of radius r holds (2r+1)^2 sites
    rare_exact = float(np.mean(float(n) ** 2 * np.exp2(-(2.0 * radii + 1) ** 2) < 0.01))
    rep.record("fraction_ball_stationary_below_0.01", tag, rare_exact,
               note="same share using the exact site count (2r+1)^2 of the ball")
    rep.record("median_radius_half_cover", tag, float(np.median(batch.ball_radius[:, batch.probe_index(t50)])),
               note="largest uncovered ball at 0.5 E C")
    r_star = math.ceil(math.sqrt(2 * math.log2(n)))
    rep.check("stationary_ball_count", "expected all-off balls of radius ceil(sqrt(2 log2 n))", tag,
              "n^2 2^{-r^2}", float(n) ** 2 * 2.0 ** (-r_star ** 2), "<=", "1", 1.0)
    covered = (batch.cover_times >= 0) & (batch.cover_times <= t80)
    worst = int(radii[covered].max()) if covered.any() else 0
    rep.check("covered_radius_zero", "no uncovered ball once the walk has covered", tag,
              "max radius among covered trajectories", worst, "==", "0", 0, slack=0.0)
    return rep


EXPERIMENTS: dict[str, Callable[[ExperimentSpec], MixingReport]] = {
    "thm2": run_thm2_sandwich,
    "thm3": run_thm3_tv,
    "thm5": run_thm5_uniform,
    "lemmas": run_lemma_suite,
    "expander": run_expander,
    "zero_ball": run_zero_ball,
}


def run_experiment(spec: ExperimentSpec) -> MixingReport:
    if spec.name not in EXPERIMENTS:
        raise InvalidSpec(f"unknown experiment {spec.name!r}; choose from {sorted(EXPERIMENTS)}")
    log.info("running %s (seed %d)", spec.name, spec.seed)
    return EXPERIMENTS[spec.name](spec)
