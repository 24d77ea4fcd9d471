"""Explicit structure families for VCG outside the matroid setting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class StructureFamily:
    """A ground set of items and an explicit list of desired structures.

    Structures are stored sorted lexicographically (as sorted tuples), so the
    first minimizer found in storage order is the lexicographically smallest.
    """

    ground_size: int
    structures: tuple[frozenset, ...]
    name: str | None = None

    def __post_init__(self):
        structs = [frozenset(int(a) for a in s) for s in self.structures]
        if not structs:
            raise ValueError("structure family is empty")
        for s in structs:
            for a in s:
                if not 0 <= a < self.ground_size:
                    raise ValueError(f"item {a} outside ground set of size {self.ground_size}")
        if len(set(structs)) != len(structs):
            raise ValueError("duplicate structures")
        structs.sort(key=lambda s: tuple(sorted(s)))
        object.__setattr__(self, "structures", tuple(structs))

    kind = "family"

    @property
    def incidence(self) -> np.ndarray:
        """0/1 matrix of shape ``(len(structures), ground_size)``."""
        inc = np.zeros((len(self.structures), self.ground_size))
        for i, s in enumerate(self.structures):
            inc[i, list(s)] = 1.0
        return inc

    def essential_items(self) -> frozenset:
        """Items in every structure; their VCG threshold is infinite."""
        return frozenset.intersection(*self.structures)

    def to_dict(self) -> dict:
        d = {"kind": "family", "ground_size": self.ground_size,
             "structures": [sorted(s) for s in self.structures]}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StructureFamily":
        return cls(int(d["ground_size"]), tuple(frozenset(s) for s in d["structures"]), d.get("name"))

    @classmethod
    def from_json(cls, text: str) -> "StructureFamily":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def read_family(path: str | Path) -> StructureFamily:
    fam = StructureFamily.from_json(Path(path).read_text())
    return StructureFamily(fam.ground_size, fam.structures, fam.name or Path(path).name)


def min_structure(family: StructureFamily, costs: Sequence[float],
                  excluded: Iterable[int] = (), zeroed: Iterable[int] = ()) -> tuple[frozenset | None, float]:
    """Brute-force minimum structure under cost edits.

    Structures meeting ``excluded`` are skipped (infinite cost) and items in
    ``zeroed`` cost 0.  Returns ``(None, inf)`` when nothing is left.
    """
    if len(costs) != family.ground_size:
        raise ValueError(f"expected {family.ground_size} costs, got {len(costs)}")
    excluded = frozenset(excluded)
    zeroed = frozenset(zeroed)
    if excluded & zeroed:
        raise ValueError("an item cannot be both excluded and zeroed")
    best, best_cost = None, math.inf
    for s in family.structures:
        if s & excluded:
            continue
        c = sum(float(costs[a]) for a in sorted(s) if a not in zeroed)
        if c < best_cost:
            best, best_cost = s, c
    return best, best_cost


def k3_path_family() -> StructureFamily:
    """Paths between two vertices of a triangle: the direct edge 0, or edges 1 and 2."""
    return StructureFamily(3, (frozenset({0}), frozenset({1, 2})), name="k3path")


def basis_family(matroid) -> StructureFamily:
    """The bases of a small matroid as an explicit family."""
    from .matroid import enumerate_bases
    return StructureFamily(matroid.ground_size, tuple(enumerate_bases(matroid)),
                           name=f"bases({matroid!r})")
