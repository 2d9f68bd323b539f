import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lamplighter_lab.errors import MissingBaseProfile, RecurrentDimension, UnreliableEstimate, WindowTooNarrow, \
    WrongFamily
from lamplighter_lab.exact import coupon_mgf, cover_dp, mixing_profile, mixing_time_exact, return_tail
from lamplighter_lab.graphs import build_graph, complete_with_loops, cycle, lazy_kernel, torus
from lamplighter_lab.montecarlo import (EstimateCI, batch_means, largest_uncovered_ball, mgf_source_dp,
                                        mgf_source_lumped, mgf_source_mc, returns_to_origin, sample_trajectories,
                                        stationary_zero_tail, tv_lower_zero_count, tv_upper_cover,
                                        uncovered_mgf_mc, uniform_time_from_mgf, write_batch_csv,
                                        zero_tail_samples)
from lamplighter_lab.wreath import wreath_kernel


def test_complete8_mean_cover():
    batch = sample_trajectories(lazy_kernel(complete_with_loops(8)), N=100_000, master_seed=1)
    est = batch_means(batch.cover_times)
    h7 = sum(1 / i for i in range(1, 8))
    assert est.within(8 * h7, 3)


def test_cycle3_cover_matches_dp():
    base = lazy_kernel(cycle(3))
    batch = sample_trajectories(base, N=1_000_000, master_seed=5)
    assert batch_means(batch.cover_times).within(cover_dp(base).expected_cover, 3)


def test_worker_count_does_not_change_results():
    base = lazy_kernel(torus(6, 2))
    kw = dict(N=3000, master_seed=77, probe_times=[10, 50, 200], partial_ks=[1, 3], balls=True,
              keep_discovery=True)
    one = sample_trajectories(base, workers=1, **kw)
    eight = sample_trajectories(base, workers=8, chunk=37, **kw)
    for name in ("cover_times", "endpoints", "partial", "uncovered", "zero_lamps", "ball_radius", "discovery"):
        np.testing.assert_array_equal(getattr(one, name), getattr(eight, name))


def test_trajectory_view_and_horizon():
    base = lazy_kernel(cycle(10))
    batch = sample_trajectories(base, horizon=5, N=10, master_seed=3, probe_times=[0, 5])
    assert batch.censored == 10
    obs = batch[0]
    assert obs.cover_time == -1
    assert obs.uncovered[0] == 9 and obs.zero_lamps[0] == 10
    assert len(list(batch)) == 10


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["cycle:7", "torus:4,2", "hypercube:4", "complete:9", "regular:12,3,1"]),
       st.integers(0, 2**32))
def test_trajectory_monotonicity(spec, seed):
    base = lazy_kernel(build_graph(spec))
    n = base.n
    batch = sample_trajectories(base, N=50, master_seed=seed, probe_times=[0, 1, 3, 8, 20, 60, 200],
                                partial_ks=list(range(n)))
    assert np.all(np.diff(batch.partial, axis=1) <= 0)
    np.testing.assert_array_equal(batch.partial[:, 0], batch.cover_times)
    assert np.all(np.diff(batch.uncovered, axis=1) <= 0)
    assert np.all(batch.uncovered[:, 0] == n - 1)
    # unvisited lamps are off, so the zero count is at least the uncovered count
    assert np.all(batch.zero_lamps >= batch.uncovered)


def test_mgf_at_zero_is_deterministic():
    base = lazy_kernel(cycle(6))
    est = uncovered_mgf_mc(base, 0, 0, 500, seed=1)
    assert est.value == 2 ** 5 and est.se == 0.0


def test_mgf_cycle10_matches_dp():
    base = lazy_kernel(cycle(10))
    dp = cover_dp(base)
    curve = dp.mgf_curve()
    t = int(np.flatnonzero((curve >= 1.01) & (curve <= 2))[0])
    est = uncovered_mgf_mc(base, 0, t, 100_000, seed=8)
    assert est.reliable and est.within(dp.mgf(t), 3)


def test_mgf_complete64_matches_lumped():
    n = 64
    t = round(n * math.log(n))
    est = uncovered_mgf_mc(lazy_kernel(complete_with_loops(n)), 0, t, 100_000, seed=2)
    assert est.within(coupon_mgf(n, t).mgf, 3)


def test_uniform_time_examples():
    n = 256
    hi = 3 * round(n * math.log(n))
    thr = uniform_time_from_mgf(mgf_source_lumped(n, hi), 0.5, (0, hi))
    assert 0.8 <= thr.time / (n * math.log(n)) <= 1.2
    base = lazy_kernel(cycle(12))
    dp = cover_dp(base)
    exact = uniform_time_from_mgf(mgf_source_dp(dp), 0.5, (0, dp.horizon))
    mc = uniform_time_from_mgf(mgf_source_mc(base, 0, dp.horizon, 100_000, seed=12), 0.5, (0, dp.horizon))
    assert abs(mc.time - exact.time) <= 1
    assert mc.lower <= mc.time <= mc.upper
    # 2^(|G|-1) - 1 <= eps: already below the level at t = 0
    assert uniform_time_from_mgf(mgf_source_dp(cover_dp(lazy_kernel(cycle(3)))), 3.0, (0, 50)).time == 0


def test_uniform_time_errors():
    src = mgf_source_lumped(64, 1000)
    with pytest.raises(WindowTooNarrow):
        uniform_time_from_mgf(src, 0.5, (0, 10))
    with pytest.raises(WindowTooNarrow):
        uniform_time_from_mgf(src, 0.5, (600, 1000))

    def noisy(t):
        return EstimateCI(5.0, 1.0, 100, 32, reliable=t > 100)
    with pytest.raises(UnreliableEstimate):
        uniform_time_from_mgf(noisy, 0.5, (0, 1000))


def test_zero_count_lower_bound_at_time_zero():
    from scipy.stats import norm
    base = lazy_kernel(torus(8, 2))
    est = tv_lower_zero_count(base, 0, 200, K=1.0, seed=0)
    tail = stationary_zero_tail(64, 1.0)
    assert est.value == pytest.approx(1 - tail)
    assert tail == pytest.approx(norm.sf(2.0), abs=0.02)


def test_rao_blackwell_matches_sampled_indicator():
    base = lazy_kernel(torus(6, 2))
    batch = sample_trajectories(base, N=20_000, master_seed=4, probe_times=[40])
    rb = batch_means(zero_tail_samples(batch, 40, 1.0, rao_blackwell=True))
    raw = batch_means(zero_tail_samples(batch, 40, 1.0, rao_blackwell=False))
    assert rb.se <= raw.se
    assert abs(rb.value - raw.value) <= 3 * math.hypot(rb.se, raw.se)


@pytest.mark.parametrize("n", [3, 5])
def test_bounds_bracket_exact_tv(n):
    base = lazy_kernel(cycle(n))
    t_max, prof = mixing_time_exact(wreath_kernel(base), 1e-3)
    k, bprof = mixing_time_exact(base)
    for t in range(0, t_max + 1, max(1, t_max // 12)):
        lo = tv_lower_zero_count(base, t, 20_000, seed=t)
        up = tv_upper_cover(base, t, k, 20_000, seed=t, base_profile=bprof)
        assert lo.value <= prof.tv[t] + 3 * lo.se
        assert up.value >= prof.tv[t] - 3 * up.se


def test_upper_bound_trivial_and_missing_profile():
    base = lazy_kernel(cycle(4))
    prof = mixing_profile(base, 5)
    assert tv_upper_cover(base, 2, 3, 100, seed=0, base_profile=prof).value >= 1.0
    with pytest.raises(MissingBaseProfile):
        tv_upper_cover(base, 10, 1, 100, seed=0, base_profile=None)


def test_upper_bound_complete64():
    n = 64
    base = lazy_kernel(complete_with_loops(n))
    prof = mixing_profile(base, 10)
    est = tv_upper_cover(base, round(2 * n * math.log(n)), 5, 20_000, seed=3, base_profile=prof)
    assert est.value + 3 * est.se < 0.1


def test_lower_bound_vanishes_after_mixing():
    n = 32
    base = lazy_kernel(torus(n, 2))
    t = round(1.5 * n ** 2 * math.log(n) ** 2 * 8 / math.pi)
    est = tv_lower_zero_count(base, t, 2000, seed=6)
    # the true TV is still positive here, so compare with eps rather than with zero
    assert est.value + 3 * est.se < 1e-3


def test_uncovered_ball():
    n = 8
    base = lazy_kernel(torus(n, 2))
    vis = np.zeros(n * n, dtype=bool)
    vis[0] = True
    assert largest_uncovered_ball(base, vis) >= (n - 2) // 2
    assert largest_uncovered_ball(base, np.ones(n * n, dtype=bool)) == 0
    with pytest.raises(WrongFamily):
        largest_uncovered_ball(lazy_kernel(cycle(8)), np.zeros(8, dtype=bool))
    batch = sample_trajectories(base, N=200, master_seed=1, probe_times=[0, 10**5], balls=True)
    assert np.all(batch.ball_radius[:, 0] >= (n - 2) // 2)
    assert np.all(batch.ball_radius[batch.cover_times <= 10**5, 1] == 0)


def test_return_tail_matches_simulation():
    # P_0(T+ > 3) on lazy cycle(6) against 10^6 independent numpy walks
    exact = return_tail(lazy_kernel(cycle(6)), 0, 3)
    rng = np.random.default_rng(21)
    N = 1_000_000
    x = np.zeros(N, dtype=int)
    away = np.ones(N, dtype=bool)
    for _ in range(3):
        x = (x + rng.choice([0, 0, 1, -1], size=N)) % 6
        away &= x != 0
    se = math.sqrt(exact * (1 - exact) / N)
    assert abs(away.mean() - exact) <= 4 * se


def test_returns_to_origin():
    assert returns_to_origin(3, 0, 50, seed=1).value == 1.0
    a = returns_to_origin(3, 10_000, 2000, seed=1)
    b = returns_to_origin(3, 10_000, 2000, seed=2)
    assert abs(a.value - b.value) <= 3 * math.hypot(a.se, b.se)
    c = returns_to_origin(5, 10_000, 2000, seed=3)
    assert c.value < a.value
    with pytest.raises(RecurrentDimension):
        returns_to_origin(2, 10, 10, seed=0)


def test_batch_means_reliability():
    est = batch_means(np.ones(64))
    assert est.se == 0 and est.reliable
    heavy = np.zeros(3200)
    heavy[5] = 1e6
    assert not batch_means(heavy).reliable


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=300), st.integers(1, 40))
def test_batch_means_properties(xs, b):
    est = batch_means(xs, b)
    assert est.se >= 0
    assert est.value == pytest.approx(np.mean(xs), rel=1e-9, abs=1e-6)
    assert est.n == len(xs)


def test_batch_csv(tmp_path):
    path = tmp_path / "b.csv"
    write_batch_csv(path, {"cover": np.arange(64.0)}, batches=4)
    rows = path.read_text().splitlines()
    assert rows[0] == "batch,statistic,value"
    assert rows[1] == "0,cover,7.5" and len(rows) == 5
