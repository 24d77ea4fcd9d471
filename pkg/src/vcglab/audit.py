"""Per-instance exact identity checks.

Each check compares two independently computed quantities for one cost
vector and records a :class:`Violation` when they disagree beyond a relative
tolerance (default ``1e-9``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import integrals
from .kernels import extended_sweep, extended_sweep_batch
from .matroid import GraphicMatroid, Matroid, UniformMatroid
from .sampling import CostModel, sample_batch
from .setsystem import StructureFamily
from .vcg import (Instance, _independent_sets, brute_force_outcome, extended_thresholds,
                  independent_subsets, run_auction)

REL_TOL = 1e-9

BRUTE_FORCE_ITEMS = 12
EXTENDED_ALL_F_ITEMS = 8


@dataclass(frozen=True)
class Violation:
    check: str
    detail: str
    lhs: float = math.nan
    rhs: float = math.nan


@dataclass
class AuditReport:
    instances: int = 0
    checks: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def count(self, name, n=1):
        self.checks[name] = self.checks.get(name, 0) + n

    def merge(self, other: "AuditReport"):
        self.instances += other.instances
        for k, v in other.checks.items():
            self.count(k, v)
        self.violations.extend(other.violations)

    def to_dict(self, max_violations=50):
        return {"instances": self.instances, "passed": self.passed, "checks": dict(sorted(self.checks.items())),
                "violation_count": len(self.violations),
                "violations": [v.__dict__ for v in self.violations[:max_violations]]}


def close_all(lhs, rhs, tol: float = REL_TOL) -> np.ndarray:
    """Vectorized :func:`close`."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    inf = np.isinf(lhs) | np.isinf(rhs)
    with np.errstate(invalid="ignore"):
        near = np.abs(lhs - rhs) <= tol * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return np.where(inf, lhs == rhs, near)


def close(x: float, y: float, tol: float = REL_TOL) -> bool:
    if math.isinf(x) or math.isinf(y):
        return x == y
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


class _Checker:
    def __init__(self, report: AuditReport, tol: float, label: str, pending: list | None = None):
        self.report, self.tol, self.label = report, tol, label
        # array comparisons queued here are evaluated together by _flush
        self.pending = pending

    def eq(self, name, lhs, rhs, what=""):
        self.report.count(name)
        if not close(float(lhs), float(rhs), self.tol):
            self.report.violations.append(Violation(name, f"{self.label} {what}".strip(), float(lhs), float(rhs)))

    def eq_all(self, name, lhs, rhs, what=""):
        """Elementwise :meth:`eq` over two arrays; one count per element."""
        lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
        self.report.count(name, len(lhs))
        item = (name, f"{self.label} {what}".strip(), lhs, rhs)
        if self.pending is None:
            _flush(self.report, [item], self.tol)
        else:
            self.pending.append(item)

    def true(self, name, cond, what=""):
        self.report.count(name)
        if not cond:
            self.report.violations.append(Violation(name, f"{self.label} {what}".strip()))


def _flush(report: AuditReport, pending: list, tol: float):
    if not pending:
        return
    ok = close_all(np.concatenate([p[2] for p in pending]), np.concatenate([p[3] for p in pending]), tol)
    if ok.all():
        return
    offsets = np.cumsum([0] + [len(p[2]) for p in pending])
    for j in np.flatnonzero(~ok):
        k = int(np.searchsorted(offsets, j, side="right")) - 1
        name, where, lhs, rhs = pending[k]
        i = j - offsets[k]
        report.violations.append(Violation(name, f"{where}[{i}]", float(lhs[i]), float(rhs[i])))


def _same_outcome(chk: _Checker, name, a, b):
    chk.true(name, a.min_structure == b.min_structure, "min_structure")
    chk.eq(name, a.nominal_cost, b.nominal_cost, "nominal_cost")
    chk.eq(name, a.vcg_total, b.vcg_total, "vcg_total")
    chk.eq(name, a.overpayment, b.overpayment, "overpayment")
    for field_name in ("threshold", "payment", "incentive"):
        chk.eq_all(name, getattr(a, field_name), getattr(b, field_name), field_name)


def audit_instance(instance: Instance, report: AuditReport | None = None, tol: float = REL_TOL,
                   label: str = "", brute_force_items: int = BRUTE_FORCE_ITEMS,
                   all_f_items: int = EXTENDED_ALL_F_ITEMS) -> AuditReport:
    """Run every applicable identity on one instance (costs assumed distinct)."""
    report = report or AuditReport()
    _audit_one(instance, report, tol, label, brute_force_items, all_f_items, True)
    return report


def _audit_one(instance, report, tol, label, brute_force_items, all_f_items, extended, pending=None):
    report.instances += 1
    chk = _Checker(report, tol, label, pending)
    out = run_auction(instance)
    costs = np.asarray(instance.costs)
    n = instance.ground_size
    s_star = out.min_structure

    # mechanism invariants
    sel = np.zeros(n, dtype=bool)
    sel[list(s_star)] = True
    chk.eq_all("payment_rule", out.payment, np.where(sel, out.threshold, 0.0), "payment")
    # selected: threshold = cost + incentive; others: incentive = 0
    chk.eq_all("payment_rule", np.where(sel, out.threshold, 0.0),
               np.where(sel, costs + out.incentive, out.incentive), "incentive")
    picked = costs < out.threshold
    chk.report.count("selection_rule", n)
    for a in np.flatnonzero(picked != sel):
        chk.report.violations.append(Violation("selection_rule", f"{label} a={a}".strip()))
    if not out.infinite:
        chk.eq("total_split", out.vcg_total, out.nominal_cost + out.overpayment)

    if n <= brute_force_items:
        _same_outcome(chk, "brute_force", out, brute_force_outcome(instance))

    if isinstance(instance.system, Matroid) and not out.infinite:
        m = instance.system
        prof = integrals.rank_profile(instance)
        r_a = m.full_rank
        chk.eq("rank_integral", integrals.cost_via_rank_integral(prof, r_a), out.nominal_cost)
        chk.eq("bridge_integral", integrals.vcg_via_bridge_integral(prof, out.nominal_cost), out.vcg_total)
        chk.eq("sumsq_integral", integrals.sumsq_via_integral(prof, r_a),
               sum(costs[a] ** 2 for a in sorted(s_star)))
        chk.eq_all("threshold_integral", [integrals.threshold_via_integral(instance, a) for a in range(n)],
                   out.threshold, "threshold")
        if np.all(costs <= 1.0):
            chk.true("threshold_le_1", bool(np.all(out.threshold <= 1.0 + tol)))
        if extended:
            _audit_extended(chk, instance, out, all_f=n <= all_f_items)

    if isinstance(instance.system, StructureFamily) and instance.system.name == "k3path":
        x1, x2, x3 = costs
        chk.eq("k3path_linear", 2 * out.nominal_cost + out.vcg_total, 2 * x1 + x2 + x3)
    return out


def _audit_extended(chk: _Checker, instance: Instance, out, all_f: bool):
    """Extended thresholds: equality with simple thresholds on subsets of the
    minimum basis, and the membership characterization over independent sets."""
    m = instance.system
    if m.ground_size <= 62 and isinstance(m, (UniformMatroid, GraphicMatroid)):
        _audit_extended_table(chk, instance, out, all_f)
        return
    s_star = out.min_structure
    costs = instance.costs
    families = independent_subsets(instance) if all_f else independent_subsets(instance, within=s_star)
    for F in families:
        v = extended_thresholds(instance, F, check=False)
        inside = F <= s_star
        if inside:
            for a in F:
                chk.eq("extended_equals_simple", v[a], out.threshold[a], f"F={sorted(F)} a={a}")
        chk.true("extended_membership", inside == all(costs[a] <= v[a] for a in F), f"F={sorted(F)}")


@lru_cache(maxsize=64)
def _membership(system):
    sets = _independent_sets(system)
    member = np.zeros((len(sets), system.ground_size), dtype=bool)
    for i, F in enumerate(sets):
        member[i, list(F)] = True
    masks = (member.astype(np.int64) << np.arange(system.ground_size, dtype=np.int64)).sum(axis=1)
    return sets, member, masks


def _audit_extended_table(chk: _Checker, instance: Instance, out, all_f: bool):
    # same checks as the generic path, with v(F, a) from the compiled sweep
    m = instance.system
    sets, member, masks = _membership(m)
    sel = np.zeros(m.ground_size, dtype=bool)
    sel[list(out.min_structure)] = True
    inside = ~(member & ~sel).any(axis=1)
    if not all_f:
        sets = [F for F, ok in zip(sets, inside) if ok]
        member, masks, inside = member[inside], masks[inside], inside[inside]
    costs = np.asarray(instance.costs, dtype=float)
    if isinstance(m, UniformMatroid):
        empty = np.zeros(1, dtype=np.int64)
        table = extended_sweep(costs, empty, empty, 0, m.k, False, m.full_rank, masks)
    else:
        eu, ev = m.edge_arrays()
        table = extended_sweep(costs, eu, ev, m.vertex_count, 0, True, m.full_rank, masks)

    thr = np.broadcast_to(out.threshold, table.shape)
    cmp = member & inside[:, None]
    lhs, rhs = table[cmp], thr[cmp]
    chk.report.count("extended_equals_simple", int(cmp.sum()))
    finite = np.isfinite(lhs) & np.isfinite(rhs)
    ok = np.where(finite, np.abs(lhs - rhs) <= chk.tol * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs))),
                  lhs == rhs)
    if not ok.all():
        rows, cols = np.nonzero(cmp)
        for j in np.flatnonzero(~ok):
            chk.eq("extended_equals_simple", lhs[j], rhs[j], f"F={sorted(sets[rows[j]])} a={cols[j]}")
            chk.report.checks["extended_equals_simple"] -= 1

    below = np.where(member, costs[None, :] <= np.where(member, table, np.inf), True).all(axis=1)
    chk.report.count("extended_membership", len(sets))
    for i in np.flatnonzero(below != inside):
        chk.true("extended_membership", False, f"F={sorted(sets[i])}")
        chk.report.checks["extended_membership"] -= 1


def run_audit(system, reps: int, seed: int, model: CostModel | None = None, start: int = 0,
              tol: float = REL_TOL, **kw) -> AuditReport:
    """Audit ``reps`` instances with costs drawn from ``model`` (default i.i.d. U(0,1))."""
    model = model or CostModel.iid("uniform", system.ground_size)
    costs, _ = sample_batch(model, seed, start, reps)
    report = AuditReport()
    brute = kw.get("brute_force_items", BRUTE_FORCE_ITEMS)
    all_f = kw.get("all_f_items", EXTENDED_ALL_F_ITEMS)
    # small uniform / graphic matroids: extended thresholds for the whole batch at once
    batched = isinstance(system, (UniformMatroid, GraphicMatroid)) and system.ground_size <= all_f
    thr = np.empty_like(costs)
    sel = np.zeros(costs.shape, dtype=bool)
    finite = np.zeros(reps, dtype=bool)
    pending = []
    for r in range(reps):
        out = _audit_one(Instance(system, costs[r]), report, tol, f"rep={start + r}", brute, all_f, not batched,
                         pending)
        if len(pending) >= 4096:
            _flush(report, pending, tol)
            pending.clear()
        thr[r] = out.threshold
        sel[r, list(out.min_structure)] = True
        finite[r] = not out.infinite
    _flush(report, pending, tol)
    if batched:
        rows = np.flatnonzero(finite)
        _audit_extended_batch(report, system, costs[rows], thr[rows], sel[rows], rows + start, tol)
    return report


def _audit_extended_batch(report, system, costs, thr, sel, labels, tol, chunk=1024):
    """Extended-threshold checks over every independent set for a batch of instances."""
    sets, member, masks = _membership(system)
    if isinstance(system, UniformMatroid):
        eu = ev = np.zeros(1, dtype=np.int64)
        args = (eu, ev, 0, system.k, False, system.full_rank, masks)
    else:
        eu, ev = system.edge_arrays()
        args = (eu, ev, system.vertex_count, 0, True, system.full_rank, masks)
    for lo in range(0, len(costs), chunk):
        c = np.ascontiguousarray(costs[lo:lo + chunk])
        table = extended_sweep_batch(c, *args)                    # (B, S, m)
        inside = ~(member[None] & ~sel[lo:lo + chunk, None, :]).any(axis=2)
        cmp = member[None] & inside[:, :, None]
        t = np.broadcast_to(thr[lo:lo + chunk, None, :], table.shape)
        ok = close_all(table[cmp], t[cmp], tol)
        report.count("extended_equals_simple", int(cmp.sum()))
        where = np.nonzero(cmp)
        for j in np.flatnonzero(~ok):
            b, i, a = (int(x[j]) for x in where)
            report.violations.append(Violation("extended_equals_simple",
                                               f"rep={labels[lo + b]} F={sorted(sets[i])} a={a}",
                                               float(table[b, i, a]), float(t[b, i, a])))
        below = np.where(member[None], c[:, None, :] <= np.where(member[None], table, np.inf), True).all(axis=2)
        report.count("extended_membership", below.size)
        for b, i in zip(*np.nonzero(below != inside)):
            report.violations.append(Violation("extended_membership", f"rep={labels[lo + b]} F={sorted(sets[i])}"))
