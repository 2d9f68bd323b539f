import math

import pytest

from lamplighter_lab.errors import BudgetExceeded, InvalidSpec
from lamplighter_lab.exact import hitting_times, spectrum
from lamplighter_lab.experiments import ExperimentSpec, run_experiment
from lamplighter_lab.graphs import single_vertex_kernel
from lamplighter_lab.wreath import wreath_kernel


def run(name, **kw):
    return run_experiment(ExperimentSpec(name, seed=kw.pop("seed", 1), **kw))


def test_single_vertex_sandwich_is_vacuous():
    base = single_vertex_kernel()
    t_star = hitting_times(base).t_star
    t_rel = spectrum(wreath_kernel(base)).t_rel
    assert t_star == 0 and t_rel == pytest.approx(1.0)
    assert t_rel >= t_star / (8 * math.log(2))


@pytest.mark.parametrize("graph", ["cycle:6", "complete:4"])
def test_sandwich_examples(graph):
    rep = run("thm2", graphs=[graph])
    assert rep.passed and len(rep.assertions) == 2


def test_sandwich_envelope():
    with pytest.raises(BudgetExceeded):
        run("thm2", graphs=["cycle:10"])


def test_seed_is_mandatory():
    with pytest.raises(InvalidSpec):
        ExperimentSpec("thm2", seed=None)
    with pytest.raises(InvalidSpec):
        run("nope")


def test_tv_exact_leg_records_ratio():
    rep = run("thm3", graphs=["cycle:6"], sizes=[])
    r = rep.find_record("T_v_over_E_cover", "cycle(6)")
    assert 0 < r.value < 2 and r.band is None
    assert not rep.assertions


def test_tv_torus16_crossings_ordered():
    rep = run("thm3", graphs=["cycle:3"], sizes=[16], N=2000)
    order = [a for a in rep.assertions if a.name == "crossing_order"]
    assert order and all(a.passed for a in rep.assertions)
    assert "torus16_tv_bounds" in rep.curves


def test_uniform_exact_complete2():
    rep = run("thm5", graphs=["complete:2"], sizes=[64])
    q = rep.instance("complete_with_loops(2)").quantities
    assert q["tau_wreath"]["kind"] == "exact" and q["tau_wreath"]["value"] >= 1
    notes = [r.note for r in rep.records if r.name == "threshold_over_n3"]
    assert notes and "0.0832" in notes[0] and "0.1665" in notes[0]


@pytest.mark.parametrize("graph,k", [("cycle:4", 2), ("hypercube:3", 2), ("complete:6", 3)])
def test_lemma_examples(graph, k):
    rep = run("lemmas", graphs=[graph], ks=[k])
    assert rep.passed
    names = {a.name for a in rep.assertions}
    assert "transience" in names and f"matthews_k{k}" in names
    if graph.startswith("complete"):
        assert f"lumped_gap_k{k}" in names


def test_expander_small():
    rep = run("expander", sizes=[64, 128], N=300)
    r = rep.find_record("t_star_ratio_trend")
    assert r.in_band
    assert rep.instance("random_regular(64,4,1)").quantities["E_cover_over_nlogn"]["kind"] == "mc"


def test_zero_ball_small():
    rep = run("zero_ball", sizes=[16], N=200)
    assert rep.passed
    assert {a.name for a in rep.assertions} == {"stationary_ball_count", "covered_radius_zero"}
    assert "torus16_zero_ball" in rep.curves
