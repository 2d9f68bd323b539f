import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lamplighter_lab.errors import ConstructionFailed, InvalidSpec
from lamplighter_lab.graphs import (Distribution, WalkKernel, build_graph, check_reversible, complete_with_loops,
                                    cycle, hypercube, lazy_kernel, random_regular, single_vertex_kernel, torus,
                                    write_edge_list)

from _oracles import lazy_cycle_matrix


def test_cycle4_structure():
    g = cycle(4)
    assert g.n == 4 and g.degree == 2
    for x in range(4):
        assert sorted(g.adjacency[x]) == sorted({(x + 1) % 4, (x - 1) % 4})


def test_torus_3_2_structure():
    g = torus(3, 2)
    assert g.n == 9 and g.degree == 4
    assert all(len(set(nb)) == 4 for nb in g.adjacency)


def test_hypercube3_is_hamming_graph():
    g = hypercube(3)
    assert g.n == 8 and g.degree == 3
    for x in range(8):
        assert sorted(g.adjacency[x]) == sorted(x ^ (1 << i) for i in range(3))


def test_lazy_cycle4_kernel():
    k = lazy_kernel(cycle(4))
    np.testing.assert_array_equal(k.dense(), lazy_cycle_matrix(4))
    np.testing.assert_array_equal(k.stationary, np.full(4, 0.25))
    assert k.reversible


def test_complete_with_loops_rows_are_uniform():
    k = lazy_kernel(complete_with_loops(3))
    np.testing.assert_allclose(k.dense(), np.full((3, 3), 1 / 3), rtol=0, atol=1e-15)


def test_torus_kernel_normalised():
    k = lazy_kernel(torus(3, 2))
    assert k.row_sum_residual() <= 1e-12
    np.testing.assert_array_equal(k.stationary, np.full(9, 1 / 9))
    d = k.dense()
    assert np.all(np.diag(d) == 0.5)


def test_reversibility_checks():
    ok, res = check_reversible(lazy_kernel(cycle(5)))
    assert ok and res == 0.0
    q = lazy_cycle_matrix(5)
    q[0, 1] += 1e-3
    q[0] /= q[0].sum()
    bad = WalkKernel.from_dense(q, np.full(5, 0.2))
    ok, res = check_reversible(bad)
    assert not ok and res > 1e-12


@pytest.mark.parametrize("spec", ["cycle:2", "torus:2,2", "torus:4,0", "complete:1", "hypercube:0",
                                  "regular:7,3,1", "regular:10,2,1", "nope:3", "cycle:a"])
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpec):
        build_graph(spec)


def test_lazy_kernel_rejects_holding_one():
    with pytest.raises(InvalidSpec):
        lazy_kernel(cycle(4), holding=1.0)


def test_random_regular_is_deterministic_and_simple():
    a, b = random_regular(20, 3, seed=5), random_regular(20, 3, seed=5)
    assert a.adjacency == b.adjacency
    assert a.is_connected()
    for x, nb in enumerate(a.adjacency):
        assert len(nb) == 3 and len(set(nb)) == 3 and x not in nb
        assert all(x in a.adjacency[y] for y in nb)
    assert random_regular(20, 3, seed=6).adjacency != a.adjacency


def test_random_regular_budget(monkeypatch):
    assert random_regular(4, 3, seed=0).n == 4  # K_4, found by rejection
    monkeypatch.setattr("lamplighter_lab.graphs.REGULAR_RETRY_BUDGET", 0)
    with pytest.raises(ConstructionFailed):
        random_regular(20, 3, seed=0)


def test_edge_list_export():
    out = io.StringIO()
    write_edge_list(cycle(4), out)
    lines = out.getvalue().splitlines()
    assert sorted(lines) == sorted(["0 1", "0 3", "1 2", "2 3"])


def test_distribution_validation():
    Distribution(np.array([0.5, 0.5]))
    with pytest.raises(InvalidSpec):
        Distribution(np.array([0.5, 0.6]))
    with pytest.raises(InvalidSpec):
        Distribution(np.array([1.5, -0.5]))


def test_single_vertex_kernel():
    k = single_vertex_kernel()
    assert k.n == 1 and k.dense()[0, 0] == 1.0


family_specs = st.one_of(
    st.integers(3, 12).map(lambda n: f"cycle:{n}"),
    st.tuples(st.integers(3, 5), st.integers(1, 3)).map(lambda p: f"torus:{p[0]},{p[1]}"),
    st.integers(2, 10).map(lambda n: f"complete:{n}"),
    st.integers(1, 6).map(lambda d: f"hypercube:{d}"),
    # the pairing model accepts a simple graph w.p. ~exp(-(d^2-1)/4); degree <= 4 keeps the budget ample
    st.tuples(st.integers(3, 4), st.integers(0, 50)).map(lambda p: f"regular:{2 * p[0] + 4},{p[0]},{p[1]}"),
)


@settings(max_examples=60, deadline=None)
@given(family_specs, st.sampled_from([0.0, 0.25, 0.5, 0.9]))
def test_kernel_invariants(spec, holding):
    g = build_graph(spec)
    assert g.is_connected()
    assert all(len(nb) == g.degree for nb in g.adjacency)
    assert all(x in g.adjacency[y] for x, nb in enumerate(g.adjacency) for y in nb)
    k = lazy_kernel(g, holding)
    assert k.row_sum_residual() <= 1e-12
    assert k.matrix.data.min() >= 0
    assert k.stationarity_residual() <= 1e-10
    np.testing.assert_array_equal(k.stationary, np.full(g.n, 1 / g.n))
    ok, res = check_reversible(k)
    assert ok and res <= 1e-12
