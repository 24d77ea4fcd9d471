"""Command line driver.

Exit codes: 0 pass, 1 statistical check failed, 2 configuration error,
3 exact identity violated.  Every output embeds the configuration that
produced it; nothing time-dependent is written, so rerunning a config gives
the same bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import mclab, oracles
from .audit import run_audit
from .matroid import (GraphicMatroid, Matroid, UniformMatroid, complete_graph, cycle_graph, path_graph,
                      read_edge_list)
from .sampling import BetaA1, CostModel, Exponential, Uniform
from .setsystem import StructureFamily, k3_path_family, read_family

EXIT_OK, EXIT_STAT, EXIT_CONFIG, EXIT_IDENTITY = 0, 1, 2, 3

DEFAULT_MST_NS = (25, 50, 100, 200)
MST_MAX_N = 400


class ConfigError(ValueError):
    pass


def parse_system(spec: str):
    """``uniform:n,k``, ``graphic:k3|k4|c5|tree|kN|cN|<edge file>``,
    ``complete:n``, ``k3path`` or ``family:<json file or inline json>``."""
    kind, _, arg = spec.partition(":")
    kind = kind.lower()
    try:
        if kind == "uniform":
            n, k = (int(x) for x in arg.split(","))
            return UniformMatroid(n, k)
        if kind == "complete":
            return complete_graph(int(arg))
        if kind == "k3path":
            return k3_path_family()
        if kind == "family":
            text = arg.strip()
            return StructureFamily.from_json(text) if text.startswith("{") else read_family(text)
        if kind == "graphic":
            low = arg.lower()
            if low == "tree":
                return path_graph(4)
            if m := re.fullmatch(r"k(\d+)", low):
                return complete_graph(int(m.group(1)))
            if m := re.fullmatch(r"c(\d+)", low):
                return cycle_graph(int(m.group(1)))
            return read_edge_list(arg)
    except (ValueError, OSError, KeyError) as exc:
        raise ConfigError(f"bad system spec {spec!r}: {exc}") from None
    raise ConfigError(f"unknown system kind in {spec!r}")


def parse_model(dist: str, param, size: int) -> CostModel:
    try:
        return CostModel.parse(dist, size, param)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _config(args, system, **extra) -> dict:
    d = {"command": args.command, "system": args.system}
    for key in ("dist", "param", "reps", "seed", "bins"):
        if hasattr(args, key):
            d[key] = getattr(args, key)
    d["system_size"] = system.ground_size if system is not None else None
    d.update(extra)
    return d


def _emit(args, payload: dict, csv_text: str | None = None):
    if args.format == "csv" and csv_text is not None:
        text = csv_text
    else:
        text = json.dumps(payload, indent=2, allow_nan=False, default=_jsonable) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _csv(rows, header, config) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["# config", json.dumps(config, sort_keys=True)])
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------

def cmd_audit(args) -> int:
    system = parse_system(args.system)
    mclab.require_finite(system)
    model = parse_model(args.dist, args.param, system.ground_size)
    report = run_audit(system, args.reps, args.seed, model)
    cfg = _config(args, system)
    payload = {"config": cfg, **report.to_dict()}
    rows = [[name, count] for name, count in sorted(report.checks.items())]
    rows.append(["violations", len(report.violations)])
    _emit(args, payload, _csv(rows, ["check", "count"], cfg))
    return EXIT_OK if report.passed else EXIT_IDENTITY


def _oracle_for(system, model: CostModel):
    d = model.items[0]
    if not model.homogeneous:
        return None
    if isinstance(system, UniformMatroid) and 1 <= system.k < system.n:
        if isinstance(d, Uniform) and d.d == 1.0:
            return oracles.uniform_matroid_uniform_stats(system.n, system.k)
        if isinstance(d, Exponential) and d.rate == 1.0:
            return oracles.uniform_matroid_exponential_means(system.n, system.k)
    if isinstance(system, StructureFamily) and system.name == "k3path":
        if isinstance(d, Uniform) and d.d == 1.0:
            return oracles.k3_path_uniform_stats()
        if isinstance(d, Exponential) and d.rate == 1.0:
            return oracles.k3_path_exponential_means()
    return None


def cmd_estimate(args) -> int:
    system = parse_system(args.system)
    model = parse_model(args.dist, args.param, system.ground_size)
    d = model.items[0]
    uniform01 = model.homogeneous and isinstance(d, Uniform) and d.d == 1.0
    if isinstance(d, (Exponential, BetaA1)):
        rep = mclab.monotone_inequality_suite(system, model, args.reps, args.seed, threads=args.threads)
    else:
        if args.reps < 100:
            raise ConfigError("estimate needs --reps >= 100")
        samples, redrawn = mclab.simulate(system, model, args.reps, args.seed, threads=args.threads)
        rep = mclab.summarize(samples, redrawn)
        x, y = samples[:, 0], samples[:, 1]
        if uniform01 and isinstance(system, Matroid):
            rep.checks.extend(mclab.identity_checks(samples))
            rep.checks.append(mclab.twice_cstar_check(samples))
        elif uniform01:
            rep.checks.append(mclab.not_above("vcg_at_least_twice_cstar", 2 * x.mean(), y.mean(), y - 2 * x))
            if isinstance(system, StructureFamily) and system.name == "k3path":
                rep.checks.append(mclab.strictly_less("twice_cstar_strictly_below_vcg", 2 * x.mean(), y.mean(),
                                                      y - 2 * x, 4.0))
    oracle = _oracle_for(system, model)
    if oracle is not None:
        rep.checks.extend(mclab.oracle_checks(rep, oracle, gate=3.0))
    if args.audit_reps and isinstance(system, (UniformMatroid, GraphicMatroid, StructureFamily)):
        rep.audit = run_audit(system, min(args.audit_reps, args.reps), args.seed, model).to_dict()
    rep.config = _config(args, system, audit_reps=args.audit_reps)
    _emit(args, rep.to_dict(), rep.to_csv())
    if rep.audit is not None and not rep.audit["passed"]:
        return EXIT_IDENTITY
    return EXIT_OK if rep.passed else EXIT_STAT


def cmd_conditional(args) -> int:
    system = parse_system(args.system)
    model = parse_model(args.dist, args.param, system.ground_size)
    edges = None
    if args.bin_edges:
        edges = [float(x) for x in args.bin_edges.split(",")]
    rep = mclab.conditional_law(system, model, args.reps, args.seed, bins=args.bins, bin_edges=edges,
                                threads=args.threads)
    rep.config = _config(args, system, bin_edges=edges)
    checks = []
    k3path = isinstance(system, StructureFamily) and system.name == "k3path"
    if isinstance(system, Matroid):
        checks.append(rep.slope_check(gate=3.0))
        checks.extend(mclab.bin_checks(rep, gate=4.0))
    elif k3path and isinstance(model.items[0], Uniform) and model.items[0].d == 1.0:
        rep.expected = np.array([oracles.k3_path_bin_mean(max(lo, 0.0), min(hi, 2.0)) if hi > 0 and lo < 2
                                 else np.nan for lo, hi in zip(rep.bin_edges[:-1], rep.bin_edges[1:])])
        for b in np.flatnonzero(rep.populated):
            z = mclab._z(rep.mean_cstar[b] - rep.expected[b], rep.se_cstar[b])
            checks.append(mclab.Check(f"k3path_bin[{rep.bin_edges[b]:.3f},{rep.bin_edges[b + 1]:.3f})",
                                      float(rep.mean_cstar[b]), float(rep.expected[b]), float(rep.se_cstar[b]),
                                      z, bool(abs(z) <= 4.0), "|z| <= 4"))
    payload = rep.to_dict()
    payload["checks"] = [asdict(c) for c in checks]
    payload["passed"] = all(c.passed for c in checks)
    _emit(args, payload, rep.to_csv())
    return EXIT_OK if payload["passed"] else EXIT_STAT


def cmd_mst_scaling(args) -> int:
    ns = [int(x) for x in args.n.split(",")] if args.n else list(DEFAULT_MST_NS)
    if any(n > args.max_n for n in ns):
        raise ConfigError(f"n above the memory cap {args.max_n}; raise --max-n to allow it")
    if any(n < 4 for n in ns):
        raise ConfigError("mst-scaling needs n >= 4")
    rows = mclab.mst_scaling(ns, args.reps, args.seed, threads=args.threads, audit_reps=args.audit_reps,
                             max_n=args.max_n)
    cfg = {"command": "mst-scaling", "n": ns, "reps": args.reps, "seed": args.seed, "audit_reps": args.audit_reps}
    payload = {"config": cfg, "constants": oracles.mst_constants().floats(), "rows": [asdict(r) for r in rows]}
    header = ["n", "mean_cstar", "mean_vcg", "n_var_vcg", "n_var_cstar", "mean_cstar_se", "mean_vcg_se",
              "n_var_vcg_se", "n_var_cstar_se", "twice_cstar_z", "audit_max_rel_diff"]
    body = [[r.n, repr(r.mean_cstar), repr(r.mean_vcg), repr(r.n_var_vcg), repr(r.n_var_cstar),
             repr(r.mean_cstar_se), repr(r.mean_vcg_se), repr(r.n_var_vcg_se), repr(r.n_var_cstar_se),
             repr(r.twice_cstar_z), repr(r.audit_max_rel_diff)] for r in rows]
    _emit(args, payload, _csv(body, header, cfg))
    if any(r.audit_max_rel_diff > 1e-9 for r in rows):
        return EXIT_IDENTITY
    return EXIT_OK if all(abs(r.twice_cstar_z) <= 4 for r in rows) else EXIT_STAT


def cmd_oracle_dump(args) -> int:
    payload = {"config": {"command": "oracle-dump"}, "constants": oracles.all_constants()}
    _emit(args, payload)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

def _common(p, reps, system=True):
    if system:
        p.add_argument("--system", required=True, help="uniform:n,k | graphic:k3|k4|c5|tree|kN|cN|FILE | "
                                                       "complete:n | k3path | family:FILE")
        p.add_argument("--dist", default="uniform", help="uniform | exp | beta, optionally with :param")
        p.add_argument("--param", type=float, default=None, help="distribution parameter (d, rate or alpha)")
    p.add_argument("--reps", type=int, default=reps)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default $VCG_LAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vcg-lab", description="VCG overpayment experiments on matroids.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="exact per-instance identity checks")
    _common(p, 10000)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("estimate", help="moments, identities and oracle comparison")
    _common(p, 100000)
    p.add_argument("--audit-reps", type=int, default=200, help="replications replayed through the exact audit")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("conditional", help="conditional mean of c* given the VCG total")
    _common(p, 100000)
    p.add_argument("--bins", type=int, default=mclab.DEFAULT_BINS)
    p.add_argument("--bin-edges", default=None, help="comma-separated explicit bin edges")
    p.set_defaults(func=cmd_conditional)

    p = sub.add_parser("mst-scaling", help="MST of K_n with uniform edge costs over a grid of n")
    _common(p, 10000, system=False)
    p.add_argument("--n", default=None, help="comma-separated n values (default 25,50,100,200)")
    p.add_argument("--audit-reps", type=int, default=20)
    p.add_argument("--max-n", type=int, default=MST_MAX_N)
    p.set_defaults(func=cmd_mst_scaling)

    p = sub.add_parser("oracle-dump", help="closed-form constants as JSON")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_oracle_dump)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "reps", 1) is not None and getattr(args, "reps", 1) < 1:
        print("error: --reps must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except mclab.BridgedSystemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except mclab.InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAT


if __name__ == "__main__":
    sys.exit(main())
