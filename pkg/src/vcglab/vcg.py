"""The VCG procurement mechanism: thresholds, payments and outcomes.

Two routes compute the same :class:`AuctionOutcome`.  :func:`run_auction`
uses the greedy algorithm on matroids (brute force on explicit families);
:func:`brute_force_outcome` enumerates every structure and applies the
definitions directly.  Forcing an item's cost to infinity is modelled by
excluding it, so infinite costs never enter arithmetic; an infinite result
only appears as ``math.inf`` in the returned numbers.

Tied costs are resolved deterministically (greedy by ``(cost, index)``,
families by lexicographically smallest structure).  The strict selection rule
``a in S* <=> c(a) < threshold(a)`` only holds when costs are distinct.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .matroid import (Matroid, NoFiniteBasisError, _cached_bases, greedy_min_basis, greedy_order,
                      matroid_from_dict)
from .setsystem import StructureFamily, min_structure

System = Union[Matroid, StructureFamily]

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True, eq=False)
class Instance:
    system: System
    costs: tuple[float, ...]

    def __post_init__(self):
        costs = tuple(float(c) for c in self.costs)
        if len(costs) != self.system.ground_size:
            raise ValueError(f"expected {self.system.ground_size} costs, got {len(costs)}")
        for c in costs:
            if not (math.isfinite(c) and c >= 0):
                raise ValueError(f"costs must be finite and non-negative, got {c}")
        object.__setattr__(self, "costs", costs)

    @property
    def ground_size(self) -> int:
        return self.system.ground_size

    @cached_property
    def order(self) -> list[int]:
        """Items sorted by ``(cost, index)``."""
        return greedy_order(self.costs)

    @property
    def is_matroid(self) -> bool:
        return isinstance(self.system, Matroid)

    def to_dict(self) -> dict:
        return {"system": self.system.to_dict(), "costs": list(self.costs)}

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        sysd = d["system"]
        system = StructureFamily.from_dict(sysd) if sysd.get("kind") == "family" else matroid_from_dict(sysd)
        return cls(system, tuple(d["costs"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def min_cost(instance: Instance, excluded: Iterable[int] = (), zeroed: Iterable[int] = ()) -> float:
    """``c*`` of the edited instance; ``inf`` if no structure avoids ``excluded``."""
    s, c = min_structure_of(instance, excluded, zeroed)
    return c


def min_structure_of(instance: Instance, excluded: Iterable[int] = (),
                     zeroed: Iterable[int] = ()) -> tuple[frozenset | None, float]:
    sysm = instance.system
    if isinstance(sysm, Matroid):
        try:
            return greedy_min_basis(sysm, instance.costs, excluded, zeroed, order=instance.order)
        except NoFiniteBasisError:
            return None, math.inf
    return min_structure(sysm, instance.costs, excluded, zeroed)


def _diff(hi: float, lo: float) -> float:
    return math.inf if math.isinf(hi) else hi - lo


def vcg_threshold(instance: Instance, a: int) -> float:
    """``c*(I with a at infinity) - c*(I with a at 0)``; infinite for bridges."""
    _check_item(instance, a)
    return _diff(min_cost(instance, excluded={a}), min_cost(instance, zeroed={a}))


def incentive_payment(instance: Instance, a: int) -> float:
    _check_item(instance, a)
    return _diff(min_cost(instance, excluded={a}), min_cost(instance))


def extended_threshold(instance: Instance, F: Iterable[int], a: int) -> float:
    """Threshold of ``a`` with the rest of ``F`` forced to cost zero.

    ``F`` must contain ``a`` and, for matroids, be independent.
    """
    F = frozenset(int(x) for x in F)
    _check_item(instance, a)
    if a not in F:
        raise ValueError(f"item {a} not in F")
    return extended_thresholds(instance, F)[a]


def extended_thresholds(instance: Instance, F: Iterable[int], check: bool = True) -> dict[int, float]:
    """:func:`extended_threshold` for every ``a`` in ``F``, sharing ``c*`` of ``F`` zeroed."""
    F = frozenset(int(x) for x in F)
    for a in F:
        _check_item(instance, a)
    if check and instance.is_matroid and not instance.system.is_independent(F):
        raise ValueError(f"F={sorted(F)} is dependent")
    lo = min_cost(instance, zeroed=F)
    return {a: _diff(min_cost(instance, excluded={a}, zeroed=F - {a}), lo) for a in sorted(F)}


def _check_item(instance, a):
    if not 0 <= a < instance.ground_size:
        raise IndexError(f"item {a} outside ground set of size {instance.ground_size}")


@dataclass
class AuctionOutcome:
    min_structure: frozenset
    nominal_cost: float
    threshold: np.ndarray
    payment: np.ndarray
    incentive: np.ndarray
    vcg_total: float
    overpayment: float
    bridges: tuple = field(default_factory=tuple)

    @property
    def infinite(self) -> bool:
        """True when some selected item is irreplaceable, making the VCG total infinite."""
        return bool(self.bridges)

    def to_dict(self) -> dict:
        def num(x):
            return None if math.isinf(x) else float(x)
        return {
            "min_structure": sorted(self.min_structure),
            "nominal_cost": self.nominal_cost,
            "threshold": [num(x) for x in self.threshold],
            "payment": [num(x) for x in self.payment],
            "incentive": [num(x) for x in self.incentive],
            "vcg_total": num(self.vcg_total),
            "overpayment": num(self.overpayment),
            "infinite_vcg_total": self.infinite,
            "bridges": list(self.bridges),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _assemble(costs, s_star, cstar, c_inf, c_zero) -> AuctionOutcome:
    n = len(costs)
    costs = np.asarray(costs, dtype=float)
    thr = np.array([_diff(c_inf[a], c_zero[a]) for a in range(n)])
    inc = np.array([_diff(c_inf[a], cstar) for a in range(n)])
    pay = np.zeros(n)
    for a in s_star:
        pay[a] = thr[a]
    bridges = tuple(a for a in range(n) if math.isinf(c_inf[a]))
    total = sum(thr[a] for a in sorted(s_star))
    over = sum(max(thr[a] - costs[a], 0.0) for a in range(n))
    return AuctionOutcome(frozenset(s_star), cstar, thr, pay, inc, total, over, bridges)


def run_auction(instance: Instance) -> AuctionOutcome:
    """Run the VCG mechanism.

    A system with an irreplaceable item (a matroid bridge, or an item in every
    structure) yields an outcome with ``infinite`` set and ``bridges`` listing
    those items rather than an exception.
    """
    sysm = instance.system
    if isinstance(sysm, StructureFamily) and not sysm.structures:
        raise ValueError("empty structure family")
    s_star, cstar = min_structure_of(instance)
    if s_star is None:
        raise ValueError("instance has no finite-cost structure")
    n = instance.ground_size
    c_inf = [min_cost(instance, excluded={a}) for a in range(n)]
    c_zero = [min_cost(instance, zeroed={a}) for a in range(n)]
    return _assemble(instance.costs, s_star, cstar, c_inf, c_zero)


def brute_force_outcome(instance: Instance) -> AuctionOutcome:
    """Same contract as :func:`run_auction` by exhaustive enumeration.

    Matroid bases are found by checking every subset, and every ``c*`` is a
    minimum over the full structure list.  Refuses ground sets larger than
    ``BRUTE_FORCE_LIMIT``.
    """
    n = instance.ground_size
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refused: {n} items exceeds limit {BRUTE_FORCE_LIMIT}")
    sysm = instance.system
    if isinstance(sysm, Matroid):
        structures = sorted(_cached_bases(sysm), key=lambda s: tuple(sorted(s)))
    else:
        structures = list(sysm.structures)
    if not structures:
        raise ValueError("empty structure family")
    costs = instance.costs
    sums = [sum(costs[a] for a in sorted(s)) for s in structures]

    cstar = min(sums)
    if isinstance(sysm, Matroid):
        # ties: greedy picks by (cost, index); emulate with the sorted-cost key.  Tied
        # bases can differ in the last bit of their sums, so compare within rounding.
        slack = 1e-12 * max(1.0, abs(cstar))
        cands = [s for s, c in zip(structures, sums) if c <= cstar + slack]
        s_star = min(cands, key=lambda s: sorted((costs[a], a) for a in s))
        cstar = sums[structures.index(s_star)]
    else:
        s_star = next(s for s, c in zip(structures, sums) if c == cstar)

    c_inf, c_zero = [], []
    for a in range(n):
        c_inf.append(min((c for s, c in zip(structures, sums) if a not in s), default=math.inf))
        c_zero.append(min(c - costs[a] if a in s else c for s, c in zip(structures, sums)))
    return _assemble(costs, s_star, cstar, c_inf, c_zero)


def independent_subsets(instance: Instance, within: Iterable[int] | None = None) -> list[frozenset]:
    """Non-empty independent subsets (all non-empty subsets for families)."""
    if within is None:
        return list(_independent_sets(instance.system))
    within = frozenset(within)
    return [f for f in _independent_sets(instance.system) if f <= within]


@lru_cache(maxsize=64)
def _independent_sets(system) -> tuple[frozenset, ...]:
    m = system if isinstance(system, Matroid) else None
    out = []
    for r in range(1, system.ground_size + 1):
        if m is not None and r > m.full_rank:
            break
        for c in itertools.combinations(range(system.ground_size), r):
            f = frozenset(c)
            if m is None or m._rank(f) == r:
                out.append(f)
    return tuple(out)


def single_exchange_partner(instance: Instance, a: int) -> int | None:
    """For ``a`` in the greedy basis, the element replacing it when ``a`` is removed."""
    s_star, _ = min_structure_of(instance)
    if a not in s_star:
        raise ValueError(f"item {a} not selected")
    s_alt, c = min_structure_of(instance, excluded={a})
    if s_alt is None:
        return None
    diff = s_alt - s_star
    if len(diff) != 1 or len(s_star - s_alt) != 1:
        raise AssertionError(f"exchange changed more than one element: {sorted(s_star)} -> {sorted(s_alt)}")
    return next(iter(diff))
