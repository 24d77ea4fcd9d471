"""Monte Carlo estimators and statistical checks.

Per-replication samples ``(c*, VCG total, sum of squared selected costs)``
come from the batch kernels in blocks of consecutive replication indices.
Blocks may run on several threads, but every block writes to its own slice
of one preallocated array and all statistics are computed from that array
afterwards, so results do not depend on the thread count.

Standard errors come from per-replication influence values: a statistic
``T`` with ``T - target ~ mean(psi)`` gets ``se = std(psi) / sqrt(n)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np
from scipy import stats

from . import kernels
from .audit import AuditReport, run_audit
from .matroid import GraphicMatroid, Matroid, UniformMatroid, greedy_min_basis
from .sampling import BetaA1, CostModel, Exponential, Uniform, sample_batch
from .setsystem import StructureFamily
from .vcg import Instance, extended_thresholds, run_auction

DEFAULT_BLOCK = 65536
BLOCK_BUDGET = 1 << 22          # cost entries per block
DEFAULT_BINS = 20
MIN_BIN_COUNT = 30
MIN_ACCEPT_RATE = 1e-3
KS_CRIT_01 = 1.628              # asymptotic Kolmogorov critical value at level 0.01
REPLACEMENT_MIN_ITEMS = 32      # graphic systems at least this large use the replacement-edge kernel


class BridgedSystemError(ValueError):
    """The system has an item that is in every structure, so VCG totals are infinite."""

    def __init__(self, bridges):
        self.bridges = tuple(sorted(bridges))
        super().__init__(f"system has irreplaceable items (bridges) {list(self.bridges)}; VCG total is infinite")


class InsufficientDataError(RuntimeError):
    pass


def default_threads() -> int:
    env = os.environ.get("VCG_LAB_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise ValueError(f"VCG_LAB_THREADS must be an integer, got {env!r}") from None


def system_label(system) -> str:
    if isinstance(system, UniformMatroid):
        return f"uniform:{system.n},{system.k}"
    if isinstance(system, GraphicMatroid):
        return f"graphic:{system.name or 'custom'}"
    if isinstance(system, StructureFamily):
        return system.name or "family"
    return repr(system)


def require_finite(system):
    """Raise :class:`BridgedSystemError` when the VCG total would be infinite."""
    if isinstance(system, StructureFamily):
        bad = system.essential_items()
    else:
        bad = system.bridges()
    if bad:
        raise BridgedSystemError(bad)


# -- sample generation ------------------------------------------------------

def _kernel_for(system, method):
    if isinstance(system, UniformMatroid):
        k = system.k
        return lambda c: kernels.uniform_batch(c, k)
    if isinstance(system, GraphicMatroid):
        eu, ev = system.edge_arrays()
        nv = system.vertex_count
        if method == "auto":
            method = "replacement" if system.ground_size >= REPLACEMENT_MIN_ITEMS else "definition"
        if method == "replacement":
            if system.components() != 1:
                raise ValueError("replacement-edge kernel needs a connected graph")
            return lambda c: kernels.graphic_batch_replacement(c, eu, ev, nv)
        if method == "definition":
            return lambda c: kernels.graphic_batch_definition(c, eu, ev, nv)
        raise ValueError(f"unknown method {method!r}")
    if isinstance(system, StructureFamily):
        inc = system.incidence
        return lambda c: kernels.family_batch(c, inc)
    return lambda c: _python_batch(system, c)


def _python_batch(system, costs):
    out = np.empty((len(costs), 3))
    for r, row in enumerate(costs):
        res = run_auction(Instance(system, row))
        sel = sorted(res.min_structure)
        out[r] = res.nominal_cost, res.vcg_total, float(np.sum(row[sel] ** 2))
    return out


def block_size(m: int, block: int = DEFAULT_BLOCK) -> int:
    return max(1, min(block, BLOCK_BUDGET // max(m, 1)))


def simulate(system, model: CostModel, reps: int, seed: int, start: int = 0,
             threads: int | None = None, block: int = DEFAULT_BLOCK, method: str = "auto"):
    """Samples of shape ``(reps, 3)`` (``c*``, VCG total, sum of squares) and the tie re-draw count."""
    if model.size != system.ground_size:
        raise ValueError(f"cost model has {model.size} items, system has {system.ground_size}")
    require_finite(system)
    kern = _kernel_for(system, method)
    threads = default_threads() if threads is None else max(1, int(threads))
    bs = block_size(system.ground_size, block)
    starts = list(range(0, reps, bs))
    out = np.empty((reps, 3))

    def work(lo):
        n = min(bs, reps - lo)
        costs, redrawn = sample_batch(model, seed, start + lo, n)
        out[lo:lo + n] = kern(costs)
        return redrawn

    if threads == 1 or len(starts) == 1:
        redrawn = [work(lo) for lo in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            redrawn = list(pool.map(work, starts))
    return out, int(sum(redrawn))


# -- estimates --------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    @classmethod
    def of(cls, psi, value=None):
        psi = np.asarray(psi, dtype=float)
        v = float(np.mean(psi)) if value is None else float(value)
        return cls(v, float(np.std(psi, ddof=1) / math.sqrt(len(psi))))


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    se: float
    z: float
    passed: bool
    gate: str

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} se={self.se:.3g} z={self.z:+.2f} ({self.gate})"


def _z(diff, se):
    if se > 0:
        return float(diff / se)
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def two_sided(name, lhs, rhs, psi, k=4.0) -> Check:
    """``|lhs - rhs| <= k`` standard errors, with the s.e. taken from ``psi``."""
    se = Estimate.of(psi).se
    z = _z(lhs - rhs, se)
    return Check(name, float(lhs), float(rhs), se, z, bool(abs(z) <= k), f"|z| <= {k:g}")


def strictly_less(name, lhs, rhs, psi, k=3.0) -> Check:
    """``lhs < rhs`` with a margin of at least ``k`` standard errors."""
    se = Estimate.of(psi).se
    z = _z(rhs - lhs, se)
    return Check(name, float(lhs), float(rhs), se, z, bool(z >= k), f"(rhs-lhs)/se >= {k:g}")


def not_above(name, lhs, rhs, psi, k=4.0) -> Check:
    """One-sided guard: ``lhs <= rhs + k se``."""
    se = Estimate.of(psi).se
    z = _z(rhs - lhs, se)
    return Check(name, float(lhs), float(rhs), se, z, bool(z >= -k), f"(rhs-lhs)/se >= -{k:g}")


@dataclass
class EstimateReport:
    replications: int
    mean_cstar: Estimate
    mean_vcg: Estimate
    var_cstar: Estimate
    var_vcg: Estimate
    cov: Estimate
    var_diff: Estimate
    sumsq_mean: Estimate
    mixed_moments: dict
    redrawn: int = 0
    config: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    audit: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows(self):
        """``(quantity, value, se)`` in a fixed order."""
        for name in ("mean_cstar", "mean_vcg", "var_cstar", "var_vcg", "cov", "var_diff", "sumsq_mean"):
            e = getattr(self, name)
            yield name, e.value, e.se
        for m in sorted(self.mixed_moments):
            for key, e in self.mixed_moments[m].items():
                yield f"{key}[m={m}]", e.value, e.se

    def to_dict(self) -> dict:
        d = {"config": self.config, "replications": self.replications, "redrawn": self.redrawn}
        d["estimates"] = {name: {"value": v, "se": se} for name, v, se in self.rows()}
        d["checks"] = [asdict(c) for c in self.checks]
        d["passed"] = self.passed
        if self.audit is not None:
            d["audit"] = self.audit
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# config", json.dumps(self.config, sort_keys=True)])
        w.writerow(["quantity", "value", "se"])
        for name, v, se in self.rows():
            w.writerow([name, repr(v), repr(se)])
        w.writerow(["check", "lhs", "rhs", "se", "z", "passed"])
        for c in self.checks:
            w.writerow([c.name, repr(c.lhs), repr(c.rhs), repr(c.se), repr(c.z), c.passed])
        return buf.getvalue()


def summarize(samples: np.ndarray, redrawn: int = 0, config: dict | None = None) -> EstimateReport:
    if len(samples) < 2:
        raise ValueError("need at least 2 replications")
    x, y, s = samples[:, 0], samples[:, 1], samples[:, 2]
    dx, dy = x - x.mean(), y - y.mean()
    d = y - 2 * x
    dd = d - d.mean()
    n = len(x)
    mixed = {}
    for m in (0, 1, 2):
        mixed[m] = {"cstar_vcg_pow": Estimate.of(x * y ** m), "vcg_pow": Estimate.of(y ** (m + 1))}
    return EstimateReport(
        replications=n,
        mean_cstar=Estimate.of(x), mean_vcg=Estimate.of(y),
        var_cstar=Estimate.of(dx * dx, np.var(x, ddof=1)),
        var_vcg=Estimate.of(dy * dy, np.var(y, ddof=1)),
        cov=Estimate.of(dx * dy, np.sum(dx * dy) / (n - 1)),
        var_diff=Estimate.of(dd * dd, np.var(d, ddof=1)),
        sumsq_mean=Estimate.of(s),
        mixed_moments=mixed, redrawn=redrawn, config=config or {})


def _config(system, model, reps, seed, **extra):
    d = {"system": system_label(system), "model": model.to_dict(), "reps": reps, "seed": seed}
    d.update(extra)
    return d


def estimate(system, model: CostModel, reps: int, seed: int, threads: int | None = None,
             audit_reps: int = 0, method: str = "auto") -> EstimateReport:
    """Moments of ``c*`` and the VCG total with standard errors.

    Always attaches the inequality guard ``E VCG >= 2 E c*`` (uniform costs).
    ``audit_reps`` replays the first replications through the exact identity
    audit (same costs) and stores the result in ``report.audit``.
    """
    if reps < 100:
        raise ValueError("estimate needs reps >= 100")
    samples, redrawn = simulate(system, model, reps, seed, threads=threads, method=method)
    rep = summarize(samples, redrawn, _config(system, model, reps, seed))
    if isinstance(model.items[0], Uniform) and model.homogeneous:
        x, y = samples[:, 0], samples[:, 1]
        rep.checks.append(not_above("vcg_at_least_twice_cstar", 2 * x.mean(), y.mean(), y - 2 * x))
    if audit_reps and isinstance(system, (Matroid, StructureFamily)):
        a = run_audit(system, min(audit_reps, reps), seed, model)
        rep.audit = a.to_dict()
    return rep


def identity_checks(samples: np.ndarray, gate: float = 4.0) -> list[Check]:
    """Variance and mixed-moment identities for bridgeless matroids with U(0,1) costs."""
    x, y, s = samples[:, 0], samples[:, 1], samples[:, 2]
    n = len(x)
    dx, dy = x - x.mean(), y - y.mean()
    d = y - 2 * x
    dd = d - d.mean()
    vx, vy, vd = np.var(x, ddof=1), np.var(y, ddof=1), np.var(d, ddof=1)
    cov = np.sum(dx * dy) / (n - 1)
    out = [
        two_sided("cov_equals_half_var_vcg", cov, 0.5 * vy, dx * dy - 0.5 * dy * dy, gate),
        two_sided("var_vcg_equals_4var_cstar_minus_var_diff", vy, 4 * vx - vd, dy * dy - 4 * dx * dx + dd * dd, gate),
        two_sided("var_diff_equals_sumsq_mean", vd, s.mean(), dd * dd - s, gate),
        two_sided("var_cstar_equals_quarter_var_vcg_plus_quarter_sumsq", vx, 0.25 * vy + 0.25 * s.mean(),
                  dx * dx - 0.25 * dy * dy - 0.25 * s, gate),
    ]
    for m in (0, 1, 2):
        lhs, rhs = np.mean(x * y ** m), 0.5 * np.mean(y ** (m + 1))
        out.append(two_sided(f"mixed_moment_m{m}", lhs, rhs, x * y ** m - 0.5 * y ** (m + 1), gate))
    return out


def twice_cstar_check(samples: np.ndarray, gate: float = 3.0) -> Check:
    x, y = samples[:, 0], samples[:, 1]
    return two_sided("vcg_equals_twice_cstar", y.mean(), 2 * x.mean(), y - 2 * x, gate)


def variance_identity_suite(system, reps: int, seed: int, model: CostModel | None = None,
                            threads: int | None = None, gate: float = 4.0) -> EstimateReport:
    model = model or CostModel.iid("uniform", system.ground_size)
    samples, redrawn = simulate(system, model, reps, seed, threads=threads)
    rep = summarize(samples, redrawn, _config(system, model, reps, seed, suite="variance_identities"))
    rep.checks.extend(identity_checks(samples, gate))
    return rep


def oracle_checks(rep: EstimateReport, closed_form, gate: float = 3.0) -> list[Check]:
    """Compare report entries against matching closed-form values."""
    names = {"E_cstar": "mean_cstar", "E_vcg": "mean_vcg", "Var_cstar": "var_cstar",
             "Var_vcg": "var_vcg", "Var_diff": "var_diff"}
    out = []
    for key, value in closed_form.floats().items():
        if key not in names:
            continue
        e = getattr(rep, names[key])
        z = _z(e.value - value, e.se)
        out.append(Check(f"{names[key]}_vs_{closed_form.name}", e.value, value, e.se, z, bool(abs(z) <= gate),
                         f"|z| <= {gate:g}"))
    return out


# -- conditional law --------------------------------------------------------

@dataclass
class ConditionalReport:
    bin_edges: np.ndarray
    counts: np.ndarray
    mean_cstar: np.ndarray
    se_cstar: np.ndarray
    mean_vcg: np.ndarray
    gap: np.ndarray            # per-bin mean of c* - target_slope * VCG
    gap_se: np.ndarray
    dropped: list
    slope: float
    slope_se: float
    target_slope: float
    replications: int
    config: dict = field(default_factory=dict)
    expected: np.ndarray | None = None

    @property
    def populated(self) -> np.ndarray:
        # bins that met the count threshold used to build the report
        return np.isfinite(self.mean_cstar)

    def slope_check(self, target=None, gate=3.0) -> Check:
        target = self.target_slope if target is None else target
        z = _z(self.slope - target, self.slope_se)
        return Check("origin_regression_slope", self.slope, target, self.slope_se, z, bool(abs(z) <= gate),
                     f"|z| <= {gate:g}")

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else [None if not np.isfinite(v) else float(v) for v in a]
        return {"config": self.config, "replications": self.replications,
                "bin_edges": [float(e) for e in self.bin_edges], "counts": [int(c) for c in self.counts],
                "mean_cstar": arr(self.mean_cstar), "se_cstar": arr(self.se_cstar),
                "mean_vcg": arr(self.mean_vcg), "gap": arr(self.gap), "gap_se": arr(self.gap_se),
                "expected": arr(self.expected), "dropped_bins": list(self.dropped),
                "slope": self.slope, "slope_se": self.slope_se, "target_slope": self.target_slope}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# config", json.dumps(self.config, sort_keys=True)])
        w.writerow(["# slope", repr(self.slope), "se", repr(self.slope_se)])
        w.writerow(["bin_lo", "bin_hi", "count", "mean_cstar", "se_cstar", "mean_vcg", "expected"])
        exp = self.expected if self.expected is not None else [math.nan] * len(self.counts)
        for i in range(len(self.counts)):
            w.writerow([repr(float(self.bin_edges[i])), repr(float(self.bin_edges[i + 1])), int(self.counts[i]),
                        repr(float(self.mean_cstar[i])), repr(float(self.se_cstar[i])),
                        repr(float(self.mean_vcg[i])), repr(float(exp[i]))])
        return buf.getvalue()


def origin_slope(x, y) -> tuple[float, float]:
    """Least squares slope of ``x`` on ``y`` through the origin, with a heteroskedasticity-robust s.e."""
    syy = float(np.dot(y, y))
    beta = float(np.dot(x, y)) / syy
    e = x - beta * y
    return beta, math.sqrt(float(np.dot(y * y, e * e))) / syy


def conditional_from_samples(samples, bins=DEFAULT_BINS, bin_edges=None, target_slope=0.5,
                             min_count=MIN_BIN_COUNT, config=None) -> ConditionalReport:
    x, y = samples[:, 0], samples[:, 1]
    if bin_edges is None:
        if bins < 1:
            raise ValueError("bins must be positive")
        bin_edges = np.linspace(y.min(), y.max(), bins + 1)
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    idx = np.searchsorted(edges, y, side="right") - 1
    idx[y == edges[-1]] = len(edges) - 2     # right edge closes the last bin
    nb = len(edges) - 1
    counts = np.zeros(nb, dtype=np.int64)
    mx, sx, my, gap, gse = (np.full(nb, np.nan) for _ in range(5))
    dropped = []
    for b in range(nb):
        sel = idx == b
        c = int(sel.sum())
        counts[b] = c
        if c < min_count:
            dropped.append(b)
            continue
        xb, yb = x[sel], y[sel]
        mx[b], sx[b], my[b] = xb.mean(), xb.std(ddof=1) / math.sqrt(c), yb.mean()
        g = xb - target_slope * yb
        gap[b], gse[b] = g.mean(), g.std(ddof=1) / math.sqrt(c)
    if len(dropped) == nb:
        raise InsufficientDataError(f"every bin has fewer than {min_count} samples")
    slope, slope_se = origin_slope(x, y)
    return ConditionalReport(edges, counts, mx, sx, my, gap, gse, dropped, slope, slope_se, target_slope,
                             len(x), config or {})


def conditional_law(system, model: CostModel, reps: int, seed: int, bins: int = DEFAULT_BINS,
                    bin_edges=None, target_slope: float | None = None, threads: int | None = None,
                    min_count: int = MIN_BIN_COUNT) -> ConditionalReport:
    """Binned means of ``c*`` given the VCG total plus the origin-regression slope.

    ``target_slope`` defaults to 1/2 for uniform costs and ``alpha/(alpha+1)``
    for Beta(alpha, 1) costs.
    """
    if target_slope is None:
        d = model.items[0]
        target_slope = d.alpha / (d.alpha + 1) if isinstance(d, BetaA1) else 0.5
    samples, _ = simulate(system, model, reps, seed, threads=threads)
    cfg = _config(system, model, reps, seed, bins=bins if bin_edges is None else len(bin_edges) - 1)
    if bin_edges is not None:
        cfg["bin_edges"] = [float(e) for e in bin_edges]
    return conditional_from_samples(samples, bins, bin_edges, target_slope, min_count, cfg)


def bin_checks(rep: ConditionalReport, gate: float = 4.0) -> list[Check]:
    """Per populated bin: mean of ``c* - target * VCG`` is zero within ``gate`` s.e."""
    out = []
    for b in np.flatnonzero(rep.populated):
        z = _z(rep.gap[b], rep.gap_se[b])
        out.append(Check(f"bin[{rep.bin_edges[b]:.3f},{rep.bin_edges[b + 1]:.3f})",
                         float(rep.mean_cstar[b]), float(rep.target_slope * rep.mean_vcg[b]),
                         float(rep.gap_se[b]), z, bool(abs(z) <= gate), f"|z| <= {gate:g}"))
    return out


# -- conditional uniformity on F ⊆ S* ---------------------------------------

@dataclass
class UniformityReport:
    items: list
    thresholds: list           # v(F, a)
    ks_stat: list
    p_value: list
    ks_critical: float
    correlations: dict         # (a, b) -> (r, z)
    accepted: int
    draws: int
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(p > 0.01 for p in self.p_value) and all(abs(z) < 3 for _, z in self.correlations.values())

    def to_dict(self):
        return {"config": self.config, "items": self.items, "thresholds": self.thresholds,
                "ks_stat": self.ks_stat, "p_value": self.p_value, "ks_critical": self.ks_critical,
                "correlations": {f"{a},{b}": {"r": r, "z": z} for (a, b), (r, z) in self.correlations.items()},
                "accepted": self.accepted, "draws": self.draws, "passed": self.passed}


def conditional_uniformity_test(matroid: Matroid, outside_costs, F, accepted: int, seed: int,
                                model: CostModel | None = None, pilot: int = 10000,
                                max_draws: int = 10 ** 8) -> UniformityReport:
    """Resample costs on ``F`` with the other costs fixed, keep draws where
    ``F`` lies in the greedy basis, and test each kept ``c(a)`` against its
    law truncated to ``(0, v(F, a))``, plus pairwise independence.

    ``model`` covers the whole ground set; only its ``F`` entries are used.
    """
    F = sorted(set(int(a) for a in F))
    if not F:
        raise ValueError("F must be non-empty")
    if not matroid.is_independent(F):
        raise ValueError(f"F={F} is dependent")
    base = np.array(outside_costs, dtype=float)
    if base.shape != (matroid.ground_size,):
        raise ValueError("outside_costs must give one cost per item")
    model = model or CostModel.iid("uniform", matroid.ground_size)
    sub = CostModel(tuple(model.items[a] for a in F))
    Fs = frozenset(F)
    v = extended_thresholds(Instance(matroid, base), Fs, check=False)

    kept, draws, start = [], 0, 0
    chunk = pilot
    while len(kept) < accepted:
        draw, _ = sample_batch(sub, seed, start, chunk)
        start += chunk
        for row in draw:
            draws += 1
            c = base.copy()
            c[F] = row
            if Fs <= greedy_min_basis(matroid, c)[0]:
                kept.append(row)
                if len(kept) == accepted:
                    break
        if len(kept) < MIN_ACCEPT_RATE * draws:
            raise InsufficientDataError(
                f"acceptance rate {len(kept)}/{draws} is below {MIN_ACCEPT_RATE:g}; F is rarely in the minimum basis")
        if draws >= max_draws:
            raise InsufficientDataError(f"only {len(kept)} accepted after {draws} draws")
    kept = np.array(kept)

    n = len(kept)
    pits = np.empty_like(kept)
    ks, pv = [], []
    for j, a in enumerate(F):
        d = model.items[a]
        if not math.isfinite(v[a]):
            raise ValueError(f"v(F, {a}) is infinite")
        pits[:, j] = d.cdf(kept[:, j]) / d.cdf(v[a])
        res = stats.kstest(pits[:, j], "uniform")
        ks.append(float(res.statistic))
        pv.append(float(res.pvalue))
    corr = {}
    for i in range(len(F)):
        for j in range(i + 1, len(F)):
            r = float(np.corrcoef(pits[:, i], pits[:, j])[0, 1])
            corr[(F[i], F[j])] = (r, r * math.sqrt(n))
    cfg = {"system": system_label(matroid), "F": F, "outside_costs": base.tolist(),
           "model": model.to_dict(), "seed": seed, "accepted": accepted}
    return UniformityReport(F, [float(v[a]) for a in F], ks, pv, KS_CRIT_01 / math.sqrt(n), corr, n, draws, cfg)


# -- derivative identity for the rank profile -------------------------------

@dataclass
class RankDerivativeRow:
    t: float
    lhs: float                 # E bridges(A(t))
    lhs_se: float
    rhs: float                 # t * central difference of E rank(A(t))
    rhs_se: float
    diff_se: float
    bias_bound: float
    tolerance: float
    exact: float | None
    passed: bool


def _rank_bridges(system, costs, tvals):
    if isinstance(system, UniformMatroid):
        return kernels.uniform_rank_bridges(costs, system.k, tvals)
    if isinstance(system, GraphicMatroid):
        eu, ev = system.edge_arrays()
        return kernels.graphic_rank_bridges(np.ascontiguousarray(costs), eu, ev, system.vertex_count, tvals)
    ranks = np.empty((len(costs), len(tvals)), dtype=np.int64)
    brs = np.empty_like(ranks)
    for r, row in enumerate(costs):
        for i, t in enumerate(tvals):
            below = [a for a in range(len(row)) if row[a] <= t]
            ranks[r, i] = system.rank(below)
            brs[r, i] = len(system.bridges(below))
    return ranks, brs


def uniform_expected_bridges(n: int, k: int, t: float) -> float:
    """``E bridges(A(t))`` for ``U_{n,k}`` with U(0,1) costs: ``E[|A(t)|; |A(t)| <= k]``."""
    return sum(j * comb(n, j) * t ** j * (1 - t) ** (n - j) for j in range(1, k + 1))


def rank_derivative_check(system: Matroid, reps: int, seed: int, grid=(0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8),
                h: float = 0.05, gate: float = 4.0, block: int = 1 << 16) -> list[RankDerivativeRow]:
    """Compare ``E bridges(A(t))`` with ``t d/dt E rank(A(t))`` on a grid, U(0,1) costs.

    The derivative is a central difference with step ``h``.  ``E rank(A(t))``
    is a Bernstein polynomial of degree ``m`` whose coefficients have first
    differences in ``[0, 1]``, so its third derivative is bounded by
    ``2 m (m-1) (m-2)`` and the difference error by ``h^2/6`` times that.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid - h <= 0) or np.any(grid + h >= 1):
        raise ValueError("grid points and t +- h must lie strictly inside (0, 1)")
    m = system.ground_size
    tvals = np.concatenate([grid, grid - h, grid + h])
    nt = len(grid)
    model = CostModel.iid("uniform", m)
    acc = np.zeros((3, nt))       # sums of bridges, rhs terms, psi
    acc2 = np.zeros((3, nt))
    for lo in range(0, reps, block):
        n = min(block, reps - lo)
        costs, _ = sample_batch(model, seed, lo, n)
        ranks, brs = _rank_bridges(system, costs, tvals)
        b = brs[:, :nt].astype(float)
        rhs = grid * (ranks[:, 2 * nt:] - ranks[:, nt:2 * nt]) / (2 * h)
        for i, arr in enumerate((b, rhs, b - rhs)):
            acc[i] += arr.sum(axis=0)
            acc2[i] += (arr * arr).sum(axis=0)
    mean = acc / reps
    var = (acc2 - reps * mean * mean) / (reps - 1)
    se = np.sqrt(np.maximum(var, 0) / reps)
    d3 = 2.0 * m * (m - 1) * (m - 2)
    rows = []
    for i, t in enumerate(grid):
        bias = t * h * h / 6 * d3
        tol = gate * se[2, i] + bias
        exact = uniform_expected_bridges(system.n, system.k, t) if isinstance(system, UniformMatroid) else None
        ok = abs(mean[0, i] - mean[1, i]) <= tol
        if exact is not None:
            ok = ok and abs(mean[0, i] - exact) <= gate * se[0, i] and abs(mean[1, i] - exact) <= gate * se[1, i] + bias
        rows.append(RankDerivativeRow(float(t), float(mean[0, i]), float(se[0, i]), float(mean[1, i]), float(se[1, i]),
                             float(se[2, i]), float(bias), float(tol), exact, bool(ok)))
    return rows


# -- inequality suites for non-uniform costs --------------------------------

def monotone_inequality_suite(system, model: CostModel, reps: int, seed: int,
                              threads: int | None = None) -> EstimateReport:
    """Exponential costs: strict ``E c* < E VCG / 2``.  Beta(alpha, 1): ratio
    ``alpha/(alpha+1)`` (equality on bridgeless matroids) and the conditional slope."""
    d = model.items[0]
    if not model.homogeneous or not isinstance(d, (Exponential, BetaA1)):
        raise ValueError("monotone suite needs i.i.d. exponential or Beta(alpha, 1) costs")
    samples, redrawn = simulate(system, model, reps, seed, threads=threads)
    rep = summarize(samples, redrawn, _config(system, model, reps, seed, suite="monotone"))
    x, y = samples[:, 0], samples[:, 1]
    matroid = isinstance(system, Matroid)
    if isinstance(d, Exponential):
        rep.checks.append(strictly_less("cstar_below_half_vcg", x.mean(), 0.5 * y.mean(), x - 0.5 * y, 3.0))
        if matroid:
            slope, se = origin_slope(x, y)
            z = _z(0.5 - slope, se)
            rep.checks.append(Check("conditional_slope_at_most_half", slope, 0.5, se, z, bool(z >= -3.0),
                                    "(rhs-lhs)/se >= -3"))
    else:
        target = d.alpha / (d.alpha + 1)
        ratio = x.mean() / y.mean()
        psi = (x - ratio * y) / y.mean()
        if matroid:
            rep.checks.append(two_sided("cstar_vcg_ratio", ratio, target, psi, 3.0))
            slope, se = origin_slope(x, y)
            z = _z(slope - target, se)
            rep.checks.append(Check("conditional_slope", slope, target, se, z, bool(abs(z) <= 3.0), "|z| <= 3"))
        else:
            rep.checks.append(not_above("cstar_vcg_ratio", ratio, target, psi, 4.0))
    return rep


# -- MST scaling on complete graphs -----------------------------------------

@dataclass
class ScalingRow:
    n: int
    reps: int
    mean_cstar: float
    mean_cstar_se: float
    mean_vcg: float
    mean_vcg_se: float
    n_var_vcg: float
    n_var_vcg_se: float
    n_var_cstar: float
    n_var_cstar_se: float
    twice_cstar_z: float
    audit_max_rel_diff: float


def mst_scaling(ns, reps: int, seed: int, threads: int | None = None, audit_reps: int = 20,
                max_n: int = 400) -> list[ScalingRow]:
    """Complete graphs ``K_n`` with U(0,1) edge costs.

    Totals use the replacement-edge kernel; the first ``audit_reps``
    replications are recomputed with two greedy runs per selected edge and the
    largest relative disagreement is recorded.
    """
    from .matroid import complete_graph
    rows = []
    for n in ns:
        if n < 4:
            raise ValueError("mst scaling needs n >= 4")
        if n > max_n:
            raise ValueError(f"n={n} exceeds the configured cap {max_n}")
        g = complete_graph(n)
        model = CostModel.iid("uniform", g.ground_size)
        samples, _ = simulate(g, model, reps, seed, threads=threads, method="replacement")
        worst = 0.0
        if audit_reps:
            k = min(audit_reps, reps)
            costs, _ = sample_batch(model, seed, 0, k)
            eu, ev = g.edge_arrays()
            ref = kernels.graphic_batch_definition(costs, eu, ev, n)
            worst = float(np.max(np.abs(ref - samples[:k]) / np.maximum(1.0, np.abs(ref))))
        rep = summarize(samples)
        twice_cstar = twice_cstar_check(samples)
        rows.append(ScalingRow(n, reps, rep.mean_cstar.value, rep.mean_cstar.se, rep.mean_vcg.value,
                               rep.mean_vcg.se, n * rep.var_vcg.value, n * rep.var_vcg.se,
                               n * rep.var_cstar.value, n * rep.var_cstar.se, float(twice_cstar.z), worst))
    return rows
