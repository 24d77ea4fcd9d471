import math

import numpy as np
import pytest

from vcglab.matroid import UniformMatroid, complete_graph, greedy_min_basis
from vcglab.setsystem import StructureFamily, basis_family, k3_path_family, min_structure, read_family


def test_validation():
    with pytest.raises(ValueError):
        StructureFamily(2, ())
    with pytest.raises(ValueError):
        StructureFamily(2, ({0}, {2}))
    with pytest.raises(ValueError):
        StructureFamily(2, ({0}, {0}))


def test_structures_sorted_lexicographically():
    f = StructureFamily(3, ({1, 2}, {0, 2}, {0}))
    assert [sorted(s) for s in f.structures] == [[0], [0, 2], [1, 2]]


def test_incidence_and_essential():
    f = StructureFamily(3, ({0, 1}, {1, 2}))
    assert f.incidence.tolist() == [[1, 1, 0], [0, 1, 1]]
    assert f.essential_items() == {1}
    assert k3_path_family().essential_items() == frozenset()


def test_min_structure_edits():
    f = k3_path_family()
    assert min_structure(f, [0.5, 0.2, 0.2]) == (frozenset({1, 2}), pytest.approx(0.4))
    assert min_structure(f, [0.5, 0.2, 0.2], excluded={1}) == (frozenset({0}), 0.5)
    assert min_structure(f, [0.5, 0.2, 0.4], zeroed={0}) == (frozenset({0}), 0.0)
    assert min_structure(f, [0.5, 0.2, 0.4], excluded={0, 1}) == (None, math.inf)
    with pytest.raises(ValueError):
        min_structure(f, [0.5, 0.2, 0.4], excluded={0}, zeroed={0})
    with pytest.raises(ValueError):
        min_structure(f, [0.5, 0.2])


def test_ties_pick_lexicographically_smallest():
    f = StructureFamily(3, ({1, 2}, {0}))
    s, c = min_structure(f, [0.5, 0.25, 0.25])
    assert s == {0} and c == 0.5


def test_basis_family_matches_greedy():
    g = complete_graph(4)
    fam = basis_family(g)
    rng = np.random.default_rng(0)
    for _ in range(20):
        c = rng.random(6)
        assert min_structure(fam, c)[0] == greedy_min_basis(g, c)[0]
    assert len(basis_family(UniformMatroid(4, 2)).structures) == 6


def test_json_roundtrip(tmp_path):
    f = k3_path_family()
    g = StructureFamily.from_json(f.to_json())
    assert g.structures == f.structures and g.name == "k3path"
    p = tmp_path / "fam.json"
    p.write_text('{"ground_size": 4, "structures": [[0, 1], [2, 3]]}')
    h = read_family(p)
    assert h.ground_size == 4 and h.name == "fam.json"
