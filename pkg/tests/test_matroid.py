import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcglab.matroid import (GraphicMatroid, Matroid, NoFiniteBasisError, UniformMatroid, check_axioms,
                            complete_graph, cycle_graph, enumerate_bases, format_edge_list, greedy_min_basis,
                            matroid_from_dict, parse_edge_list, path_graph, read_edge_list)


def test_uniform_rank_and_bridges():
    m = UniformMatroid(4, 2)
    assert m.rank([0]) == 1
    assert m.rank([0, 1, 3]) == 2
    assert m.full_rank == 2
    assert m.is_bridgeless()
    assert m.bridges([0, 1]) == {0, 1}
    assert m.bridges([0, 1, 2]) == frozenset()


def test_uniform_full_rank_everything_is_bridge():
    assert UniformMatroid(3, 3).bridges() == {0, 1, 2}


def test_uniform_rejects_bad_k():
    with pytest.raises(ValueError):
        UniformMatroid(3, 4)
    with pytest.raises(ValueError):
        UniformMatroid(3, -1)


def test_graphic_k4():
    g = complete_graph(4)
    assert g.ground_size == 6
    assert g.full_rank == 3
    assert g.is_bridgeless()
    # triangle 0-1-2 uses edges (0,1),(0,2),(1,2)
    tri = [g.edges.index(e) for e in [(0, 1), (0, 2), (1, 2)]]
    assert g.rank(tri) == 2


def test_tree_all_bridges_cycle_none():
    t = path_graph(5)
    assert t.bridges() == t.ground_set
    c = cycle_graph(5)
    assert c.bridges() == frozenset()
    assert c.full_rank == 4


def test_graphic_rank_is_vertices_minus_components():
    g = complete_graph(5)
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = [e for e in range(g.ground_size) if rng.random() < 0.4]
        assert g.rank(s) == g.vertex_count - g.components(s)


def test_loop_edge_has_rank_zero():
    g = GraphicMatroid(2, [(0, 0), (0, 1), (0, 1)])
    assert g.rank([0]) == 0
    assert g.bridges() == frozenset()
    assert g.full_rank == 1


def test_element_out_of_range():
    with pytest.raises(IndexError):
        UniformMatroid(3, 1).rank([3])
    with pytest.raises(IndexError):
        complete_graph(3).bridges([-1])


@pytest.mark.parametrize("m", [UniformMatroid(5, 2), complete_graph(4), cycle_graph(5),
                               GraphicMatroid(3, [(0, 1), (0, 1), (1, 2), (0, 2)])])
def test_rank_axioms_hold(m):
    check_axioms(m)


def test_check_axioms_catches_non_matroid():
    # rank 2 on {0,1} and {2,3} but both pairs "parallel" across: not submodular
    bad = Matroid(4, rank_fn=lambda s: min(len(s), 2) if s not in ({0, 1, 2}, {0, 1, 3}) else 3)
    with pytest.raises(AssertionError):
        check_axioms(bad)


def test_custom_rank_function_bounds():
    m = Matroid(2, rank_fn=lambda s: 5, check_axioms=True)
    with pytest.raises(ValueError):
        m.rank([0])


def test_custom_matroid_matches_uniform():
    custom = Matroid(5, rank_fn=lambda s: min(len(s), 2))
    u = UniformMatroid(5, 2)
    costs = [0.3, 0.1, 0.7, 0.2, 0.9]
    assert greedy_min_basis(custom, costs) == greedy_min_basis(u, costs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1, allow_nan=False), min_size=6, max_size=6))
def test_greedy_is_optimal_on_k4(costs):
    g = complete_graph(4)
    basis, cost = greedy_min_basis(g, costs)
    best = min(sum(costs[a] for a in b) for b in enumerate_bases(g))
    assert g.is_independent(basis) and len(basis) == 3
    assert cost == pytest.approx(best, abs=1e-12)


def test_greedy_tie_break_by_index():
    basis, _ = greedy_min_basis(UniformMatroid(4, 2), [0.5, 0.5, 0.5, 0.1])
    assert basis == {3, 0}


def test_greedy_zeroed_and_excluded():
    u = UniformMatroid(4, 2)
    costs = [0.1, 0.2, 0.3, 0.4]
    assert greedy_min_basis(u, costs, zeroed={3}) == (frozenset({3, 0}), pytest.approx(0.1))
    assert greedy_min_basis(u, costs, excluded={0}) == (frozenset({1, 2}), pytest.approx(0.5))
    with pytest.raises(NoFiniteBasisError):
        greedy_min_basis(u, costs, excluded={0, 1, 2})


def test_greedy_wrong_length():
    with pytest.raises(ValueError):
        greedy_min_basis(UniformMatroid(3, 1), [0.1, 0.2])


def test_enumerate_bases_counts():
    assert len(enumerate_bases(UniformMatroid(5, 2))) == 10
    assert len(enumerate_bases(complete_graph(4))) == 16     # Cayley: 4^(4-2)


def test_edge_list_roundtrip(tmp_path):
    g = complete_graph(4)
    p = tmp_path / "k4.txt"
    p.write_text("# K4\n" + format_edge_list(g))
    h = read_edge_list(p)
    assert h.edges == g.edges and h.vertex_count == 4


def test_edge_list_errors():
    with pytest.raises(ValueError):
        parse_edge_list("0 1\n1\n")
    with pytest.raises(ValueError):
        parse_edge_list("0 5\n", vertex_count=3)


def test_dict_roundtrip():
    for m in (UniformMatroid(6, 3), cycle_graph(5)):
        back = matroid_from_dict(m.to_dict())
        assert type(back) is type(m)
        assert all(back.rank(s) == m.rank(s) for s in itertools.combinations(range(m.ground_size), 3))
    with pytest.raises(ValueError):
        matroid_from_dict({"kind": "nope"})


def test_tracker_spans_matches_rank():
    g = complete_graph(4)
    for m in (g, UniformMatroid(5, 2), Matroid(5, rank_fn=lambda s: min(len(s), 2))):
        t = m.tracker()
        added = []
        for a in range(m.ground_size):
            for b in range(m.ground_size):
                assert t.spans(b) == (m.rank(set(added) | {b}) == m.rank(added))
            t.try_add(a)
            added.append(a)


def test_graph_bridges_match_rank_definition():
    rng = np.random.default_rng(0)
    for _ in range(300):
        nv = int(rng.integers(1, 7))
        edges = [(int(rng.integers(nv)), int(rng.integers(nv))) for _ in range(int(rng.integers(0, 10)))]
        g = GraphicMatroid(nv, edges)
        s = frozenset(e for e in range(len(edges)) if rng.random() < 0.7)
        r = g.rank(s)
        assert g.bridges(s) == {a for a in s if g.rank(s - {a}) < r}
