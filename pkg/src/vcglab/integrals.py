"""Exact step-function integrals over the sublevel sets ``A(t) = {a : c(a) <= t}``.

For a matroid, ``rank(A(t))`` and the bridge count of ``A(t)`` are piecewise
constant in ``t`` with jumps only at item costs, so every integral below is a
finite sum over intervals, accumulated in ascending ``t``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .matroid import Matroid
from .vcg import Instance


class DivergentIntegralError(ValueError):
    """The integrand does not vanish for large ``t`` (the matroid has a bridge)."""


@dataclass(frozen=True)
class RankProfile:
    """``rank_at[i]`` and ``bridge_count_at[i]`` hold on ``[t_i, t_{i+1})``.

    ``t_0 = 0`` is implicit and the last interval is unbounded, so both arrays
    have one more entry than ``breakpoints``.  Only cost values where the pair
    (rank, bridges) actually changes are kept.
    """

    breakpoints: np.ndarray
    rank_at: np.ndarray
    bridge_count_at: np.ndarray

    def intervals(self):
        """Yield ``(t_lo, t_hi, rank, bridges)``; the last ``t_hi`` is ``inf``."""
        lo = np.concatenate(([0.0], self.breakpoints))
        hi = np.concatenate((self.breakpoints, [math.inf]))
        for i in range(len(lo)):
            yield float(lo[i]), float(hi[i]), int(self.rank_at[i]), int(self.bridge_count_at[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_lo", "t_hi", "rank", "bridges"])
        for row in self.intervals():
            w.writerow([repr(row[0]), repr(row[1]), row[2], row[3]])
        return buf.getvalue()


def _matroid_of(instance: Instance) -> Matroid:
    if not instance.is_matroid:
        raise TypeError("rank integrals need a matroid instance")
    return instance.system


def rank_profile(instance: Instance) -> RankProfile:
    m = _matroid_of(instance)
    costs = np.asarray(instance.costs)
    order = sorted(range(len(costs)), key=lambda a: (costs[a], a))
    tracker = m.tracker()
    r = 0
    current: set = set()
    ts, ranks, brs = [], [0], [0]
    i = 0
    while i < len(order):
        t = costs[order[i]]
        while i < len(order) and costs[order[i]] == t:
            a = order[i]
            current.add(a)
            r += tracker.try_add(a)
            i += 1
        b = len(m.bridges(current))
        if t == 0.0:
            ranks[0], brs[0] = r, b
            continue
        if (r, b) != (ranks[-1], brs[-1]):
            ts.append(float(t))
            ranks.append(r)
            brs.append(b)
    return RankProfile(np.array(ts), np.array(ranks, dtype=np.int64), np.array(brs, dtype=np.int64))


def _lengths(profile: RankProfile) -> np.ndarray:
    t = np.concatenate(([0.0], profile.breakpoints))
    return np.diff(t)


def cost_via_rank_integral(profile: RankProfile, rank_A: int) -> float:
    """Integral of ``rank(A) - rank(A(t))`` over ``t >= 0``."""
    if profile.rank_at[-1] != rank_A:
        raise DivergentIntegralError("profile never reaches full rank")
    total = 0.0
    for gap, r in zip(_lengths(profile), profile.rank_at[:-1]):
        total += (rank_A - r) * gap
    return total


def vcg_via_bridge_integral(profile: RankProfile, nominal: float) -> float:
    """``nominal`` plus the integral of the bridge count of ``A(t)``."""
    if profile.bridge_count_at[-1] != 0:
        raise DivergentIntegralError(f"{profile.bridge_count_at[-1]} bridges remain in the ground set")
    total = 0.0
    for gap, b in zip(_lengths(profile), profile.bridge_count_at[:-1]):
        total += b * gap
    return nominal + total


def sumsq_via_integral(profile: RankProfile, rank_A: int) -> float:
    """Integral of ``(rank(A) - rank(A(t))) * 2t``, i.e. the sum of squared greedy-basis costs."""
    if profile.rank_at[-1] != rank_A:
        raise DivergentIntegralError("profile never reaches full rank")
    t = np.concatenate(([0.0], profile.breakpoints))
    total = 0.0
    for i, r in enumerate(profile.rank_at[:-1]):
        total += (rank_A - r) * (t[i + 1] ** 2 - t[i] ** 2)
    return total


def threshold_via_integral(instance: Instance, a: int) -> float:
    """Integral of ``rank(A(t) + a) - rank(A(t) - a)`` over ``t >= 0``.

    The integrand depends only on the other items' costs, so the breakpoints
    are those costs.
    """
    m = _matroid_of(instance)
    if not 0 <= a < m.ground_size:
        raise IndexError(f"item {a} outside ground set")
    costs = instance.costs
    pending = sorted((costs[b], b) for b in range(m.ground_size) if b != a)
    below = m.tracker()
    total, t_prev = 0.0, 0.0
    j = 0
    while j < len(pending):
        t = pending[j][0]
        # rank(A(t) + a) - rank(A(t) - a) is 1 exactly when a is outside the span
        if not below.spans(a):
            total += t - t_prev
        while j < len(pending) and pending[j][0] == t:
            below.try_add(pending[j][1])
            j += 1
        t_prev = t
    if not below.spans(a):
        raise DivergentIntegralError(f"item {a} is a bridge")
    return total


def kappa_minus_one(instance: Instance, t: float) -> int:
    """Components of the graph ``A(t)`` minus one (graphic matroids only)."""
    m = _matroid_of(instance)
    below = [b for b in range(m.ground_size) if instance.costs[b] <= t]
    return m.components(below) - 1
