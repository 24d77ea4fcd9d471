import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcglab import integrals
from vcglab.integrals import DivergentIntegralError
from vcglab.matroid import Matroid, UniformMatroid, complete_graph, cycle_graph, path_graph
from vcglab.vcg import Instance, run_auction


def k3():
    return Instance(complete_graph(3), (0.2, 0.5, 0.7))


def test_k3_profile():
    p = integrals.rank_profile(k3())
    assert p.breakpoints.tolist() == [0.2, 0.5, 0.7]
    assert p.rank_at.tolist() == [0, 1, 2, 2]
    assert p.bridge_count_at.tolist() == [0, 1, 2, 0]
    rows = list(p.intervals())
    assert rows[0] == (0.0, 0.2, 0, 0) and rows[-1][1] == float("inf")
    assert p.to_csv().splitlines()[0] == "t_lo,t_hi,rank,bridges"


def test_k3_integrals():
    inst = k3()
    p = integrals.rank_profile(inst)
    c = integrals.cost_via_rank_integral(p, 2)
    assert c == pytest.approx(0.7)
    assert integrals.vcg_via_bridge_integral(p, c) == pytest.approx(1.4)
    assert integrals.threshold_via_integral(inst, 0) == pytest.approx(0.7)
    assert integrals.sumsq_via_integral(p, 2) == pytest.approx(0.2 ** 2 + 0.5 ** 2)


def test_uniform_examples():
    inst = Instance(UniformMatroid(3, 1), (0.3, 0.6, 0.9))
    p = integrals.rank_profile(inst)
    assert integrals.cost_via_rank_integral(p, 1) == pytest.approx(0.3)
    assert integrals.threshold_via_integral(inst, 0) == pytest.approx(0.6)
    u, v = 0.25, 0.65
    inst = Instance(UniformMatroid(2, 1), (v, u))
    p = integrals.rank_profile(inst)
    assert integrals.vcg_via_bridge_integral(p, u) == pytest.approx(v)


def test_all_zero_costs():
    inst = Instance(UniformMatroid(3, 2), (0.0, 0.0, 0.0))
    p = integrals.rank_profile(inst)
    assert len(p.breakpoints) == 0
    assert integrals.cost_via_rank_integral(p, 2) == 0.0


def test_degenerate_rank_zero():
    # U_{1,0}: the rank never changes, so there are no breakpoints at all
    inst = Instance(UniformMatroid(1, 0), (0.4,))
    p = integrals.rank_profile(inst)
    assert len(p.breakpoints) == 0
    assert p.rank_at.tolist() == [0] and p.bridge_count_at.tolist() == [0]


def test_cycle_c4_against_auction():
    inst = Instance(cycle_graph(4), (0.1, 0.2, 0.3, 0.4))
    out = run_auction(inst)
    p = integrals.rank_profile(inst)
    assert integrals.vcg_via_bridge_integral(p, out.nominal_cost) == pytest.approx(out.vcg_total)


def test_divergence_on_bridges():
    inst = Instance(path_graph(3), (0.1, 0.2))
    p = integrals.rank_profile(inst)
    with pytest.raises(DivergentIntegralError):
        integrals.vcg_via_bridge_integral(p, 0.3)
    with pytest.raises(DivergentIntegralError):
        integrals.threshold_via_integral(inst, 0)


def test_non_matroid_rejected():
    from vcglab.setsystem import k3_path_family
    with pytest.raises(TypeError):
        integrals.rank_profile(Instance(k3_path_family(), (0.1, 0.2, 0.3)))


def test_kappa_minus_one():
    inst = k3()
    assert integrals.kappa_minus_one(inst, 0.0) == 2
    assert integrals.kappa_minus_one(inst, 0.3) == 1
    assert integrals.kappa_minus_one(inst, 1.0) == 0


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=6, max_size=6))
def test_integrals_match_greedy_k4(costs):
    inst = Instance(complete_graph(4), tuple(costs))
    out = run_auction(inst)
    p = integrals.rank_profile(inst)
    assert integrals.cost_via_rank_integral(p, 3) == pytest.approx(out.nominal_cost, abs=1e-12)
    assert integrals.vcg_via_bridge_integral(p, out.nominal_cost) == pytest.approx(out.vcg_total, abs=1e-12)
    for a in range(6):
        assert integrals.threshold_via_integral(inst, a) == pytest.approx(out.threshold[a], abs=1e-12)


def test_custom_matroid_threshold_integral():
    m = Matroid(4, rank_fn=lambda s: min(len(s), 2))
    inst = Instance(m, (0.4, 0.1, 0.3, 0.2))
    out = run_auction(inst)
    for a in range(4):
        assert integrals.threshold_via_integral(inst, a) == pytest.approx(out.threshold[a])


def test_bridge_count_matches_raw_rank_calls():
    g = complete_graph(4)
    rng = np.random.default_rng(1)
    for _ in range(30):
        s = frozenset(e for e in range(6) if rng.random() < 0.6)
        raw = sum(g.rank(s) - g.rank(s - {a}) for a in s)
        assert len(g.bridges(s)) == raw
