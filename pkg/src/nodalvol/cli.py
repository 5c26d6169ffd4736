"""Batch front-end: subcommands wiring the analysis modules, key-value
config files with flag overrides, deterministic seeding, JSON reports
and CSV tables.

Report schema (version 1): config echo, per-item results, pass flags,
wall clock, library version, RNG algorithm name.  Exit status is 0 iff
every pass flag is set.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .asympt import check_gegenbauer_expansion, check_lem4_integral, uniform_bound_search
from .chaos_poly import verify_identities
from .fieldsim import mean_nodal_length_mc, nodal_length_s2, one_point_mean, simulate_field_s2
from .geometry import loglog_slope
from .rng import GENERATOR_NAME
from .variance import (
    QuadConfig,
    berry_ratio,
    chaos_variance,
    kacrice_crosscheck,
    scaling_study,
    total_variance,
)

SCHEMA_VERSION = 1


def _parse_config_file(path: str) -> Dict[str, str]:
    """key = value lines; '#' comments and blank lines ignored."""
    out: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _parse_ells(text: str) -> List[int]:
    ells = [int(x) for x in text.split(",") if x.strip()]
    if not ells:
        raise ValueError("empty ell list")
    if any(e < 1 for e in ells):
        raise ValueError("ell values must be >= 1")
    return ells


def _thread_count(args) -> int:
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("NODALVOL_THREADS")
    return int(env) if env else 1


def _ordered_map(fn, items: Sequence, threads: int) -> List:
    """Map preserving input order; pool size does not affect results."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])


def _write_report(args, results: List[dict], passed: bool, t0: float) -> None:
    if not getattr(args, "out", None):
        return
    config = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func",) and not k.startswith("_")
    }
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "generator": GENERATOR_NAME,
        "config": config,
        "results": results,
        "passed": passed,
        "wall_clock_s": time.monotonic() - t0,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_verify_identities(args, parser) -> int:
    t0 = time.monotonic()
    certs = verify_identities(qmax=args.qmax, dmax=args.dmax)
    rows = [(c.name, json.dumps(c.params, sort_keys=True), c.ok) for c in certs]
    if args.csv:
        _write_csv(args.csv, ["name", "params", "ok"], rows)
    passed = all(c.ok for c in certs)
    results = [
        {"name": c.name, "params": c.params, "ok": c.ok, "detail": c.detail}
        for c in certs
    ]
    _write_report(args, results, passed, t0)
    for c in certs:
        print(f"{'PASS' if c.ok else 'FAIL'} {c.name} {c.params}")
    return 0 if passed else 1


def _cmd_variance(args, parser) -> int:
    t0 = time.monotonic()
    ells = _parse_ells(args.ells)
    threads = _thread_count(args)
    cfg = QuadConfig()
    totals = _ordered_map(
        lambda ell: total_variance(ell, args.d, qmax=args.qmax, quad_cfg=cfg),
        ells,
        threads,
    )
    rows = []
    for tv in totals:
        for cv in tv.per_q:
            rows.append((args.d, cv.ell, cv.q, cv.value, cv.quadrature_error))
    if args.csv:
        _write_csv(args.csv, ["d", "ell", "q", "variance", "quad_error"], rows)
    passed = not any(tv.truncation_warning for tv in totals)
    results = [
        {
            "ell": tv.ell,
            "total": tv.total,
            "qmax": tv.qmax,
            "tail_fraction": tv.tail_fraction,
            "truncation_warning": tv.truncation_warning,
        }
        for tv in totals
    ]
    _write_report(args, results, passed, t0)
    for tv in totals:
        print(
            f"ell={tv.ell} total={tv.total:.6e} tail={tv.tail_fraction:.3e}"
            + (" TRUNCATION-WARNING" if tv.truncation_warning else "")
        )
    return 0 if passed else 1


def _cmd_scaling(args, parser) -> int:
    t0 = time.monotonic()
    ells = _parse_ells(args.ells)
    report = scaling_study(args.d, ells, qmax=args.qmax)
    rows = list(zip([args.d] * len(ells), ells, report.totals, report.tail_fractions))
    if args.csv:
        _write_csv(args.csv, ["d", "ell", "total_variance", "tail_fraction"], rows)
    passed = report.passed if report.passed is not None else True
    results = [
        {
            "slope": report.slope,
            "expected_slope": report.expected_slope,
            "totals": report.totals,
            "passed": report.passed,
        }
    ]
    _write_report(args, results, passed, t0)
    print(f"slope={report.slope:.4f} expected={report.expected_slope} pass={passed}")
    return 0 if passed else 1


def _cmd_berry(args, parser) -> int:
    t0 = time.monotonic()
    ells = _parse_ells(args.ells)
    if len(ells) < 2:
        parser.error("berry needs at least 2 ell values")
    threads = _thread_count(args)
    ratios = _ordered_map(
        lambda ell: berry_ratio(args.u, ell, args.d, qmax=args.qmax), ells, threads
    )
    slope = loglog_slope(ells, ratios)
    passed = abs(slope + 1.0) <= args.slope_tol
    rows = list(zip([args.d] * len(ells), ells, ratios))
    if args.csv:
        _write_csv(args.csv, ["d", "ell", "ratio"], rows)
    _write_report(args, [{"slope": slope, "ratios": ratios}], passed, t0)
    print(f"u={args.u} slope={slope:.4f} pass={passed}")
    return 0 if passed else 1


def _cmd_simulate(args, parser) -> int:
    t0 = time.monotonic()
    if args.d != 2:
        parser.error("simulate supports d=2 only")
    est = mean_nodal_length_mc(args.ell, args.draws, args.seed)
    if args.csv:
        rows = [
            (k, nodal_length_s2(simulate_field_s2(args.ell, args.seed, sample=k)))
            for k in range(args.draws)
        ]
        _write_csv(args.csv, ["draw", "length"], rows)
    tol = 3.0 * est.stderr + 0.02 * est.expected
    passed = abs(est.mean - est.expected) <= tol
    _write_report(args, [dataclasses.asdict(est)], passed, t0)
    print(
        f"ell={est.ell} mean={est.mean:.4f} expected={est.expected:.4f} "
        f"rel_err={est.rel_err:.4f} pass={passed}"
    )
    return 0 if passed else 1


def _cmd_mean_check(args, parser) -> int:
    t0 = time.monotonic()
    est = one_point_mean(args.d, args.ell, args.eps, args.n, args.seed)
    passed = abs(est.mean - est.expected) <= 3.0 * est.stderr + est.expected * args.eps**2
    _write_report(args, [dataclasses.asdict(est)], passed, t0)
    print(
        f"d={args.d} ell={est.ell} mean={est.mean:.4f} expected={est.expected:.4f} "
        f"stderr={est.stderr:.4f} pass={passed}"
    )
    return 0 if passed else 1


def _cmd_asympt(args, parser) -> int:
    t0 = time.monotonic()
    ells = _parse_ells(args.ells)
    checks = []
    if args.check == "gegenbauer":
        checks.extend(check_gegenbauer_expansion(ells, args.d))
    elif args.check == "lem4":
        if args.a:
            partitions = [[int(x) for x in args.a.split(",")]]
        else:
            base = [0] * (args.d + 3)
            partitions = []
            for slot in (args.d - 1, args.d, args.d + 2):
                a = list(base)
                a[slot] = 4
                partitions.append(a)
        for a in partitions:
            checks.append(check_lem4_integral(a, args.d, ells))
    else:
        parser.error("--check must be gegenbauer or lem4")
    rows = [
        (c.quantity, c.d, c.slope, c.predicted_slope, c.passed) for c in checks
    ]
    if args.csv:
        _write_csv(args.csv, ["quantity", "d", "slope", "predicted_slope", "passed"], rows)
    passed = all(c.passed for c in checks)
    _write_report(args, [dataclasses.asdict(c) for c in checks], passed, t0)
    for c in checks:
        print(
            f"{'PASS' if c.passed else 'FAIL'} {c.quantity} "
            f"slope={c.slope:.3f} predicted={c.predicted_slope:.3f}"
        )
    return 0 if passed else 1


def _cmd_kacrice_crosscheck(args, parser) -> int:
    t0 = time.monotonic()
    res = kacrice_crosscheck(args.ell, args.d, n_theta=args.n_theta, qmax=args.qmax)
    passed = res.rel_diff <= args.tol
    _write_report(args, [dataclasses.asdict(res)], passed, t0)
    print(
        f"chaos={res.chaos_total:.6e} kacrice={res.kacrice_total:.6e} "
        f"rel_diff={res.rel_diff:.4f} pass={passed}"
    )
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(sp) -> None:
    sp.add_argument("--config", help="key = value config file; flags override it")
    sp.add_argument("--out", help="JSON report path")
    sp.add_argument("--csv", help="CSV table path")
    sp.add_argument("--threads", type=int, help="worker threads (env NODALVOL_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nodalvol", description="Nodal volume chaos-expansion laboratory"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify-identities", help="exact polynomial identity suite")
    sp.add_argument("--qmax", type=int, default=4)
    sp.add_argument("--dmax", type=int, default=4)
    _add_common(sp)
    sp.set_defaults(func=_cmd_verify_identities)

    sp = sub.add_parser("variance", help="per-order chaos variances")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--ells", default="")
    sp.add_argument("--qmax", type=int, default=6)
    _add_common(sp)
    sp.set_defaults(func=_cmd_variance)

    sp = sub.add_parser("scaling", help="log-log slope of total variance")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--ells", default="")
    sp.add_argument("--qmax", type=int, default=6)
    _add_common(sp)
    sp.set_defaults(func=_cmd_scaling)

    sp = sub.add_parser("berry", help="nodal / level-set variance ratio")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--ells", default="")
    sp.add_argument("--u", type=float, default=1.0)
    sp.add_argument("--qmax", type=int, default=6)
    sp.add_argument("--slope-tol", type=float, default=0.3)
    _add_common(sp)
    sp.set_defaults(func=_cmd_berry)

    sp = sub.add_parser("simulate", help="direct nodal-length simulation on the 2-sphere")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--draws", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("mean-check", help="one-point expectation estimator")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--n", type=int, default=10**6)
    sp.add_argument("--seed", type=int, default=0)
    _add_common(sp)
    sp.set_defaults(func=_cmd_mean_check)

    sp = sub.add_parser("asympt", help="high-frequency asymptotic checks")
    sp.add_argument("--check", choices=["gegenbauer", "lem4"], required=True)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--ells", default="")
    sp.add_argument("--a", help="comma-separated exponent partition for lem4")
    _add_common(sp)
    sp.set_defaults(func=_cmd_asympt)

    sp = sub.add_parser("kacrice-crosscheck", help="chaos series vs direct two-point integral")
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--ell", type=int, required=True)
    sp.add_argument("--n-theta", type=int, default=12)
    sp.add_argument("--qmax", type=int, default=24)
    sp.add_argument("--tol", type=float, default=0.10)
    _add_common(sp)
    sp.set_defaults(func=_cmd_kacrice_crosscheck)

    return parser


def _apply_config(args, parser) -> None:
    """Fill unset flags from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    values = _parse_config_file(args.config)
    for key, raw in values.items():
        if not hasattr(args, key):
            parser.error(f"unknown config key: {key}")
        if getattr(args, key) is not None and _flag_given(key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes"))
        elif isinstance(current, int):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        else:
            setattr(args, key, raw)


_GIVEN_FLAGS: set = set()


def _flag_given(key: str) -> bool:
    return key in _GIVEN_FLAGS


def _record_given_flags(argv: Sequence[str]) -> None:
    _GIVEN_FLAGS.clear()
    for token in argv:
        if token.startswith("--"):
            _GIVEN_FLAGS.add(token[2:].split("=", 1)[0].replace("-", "_"))


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    _record_given_flags(argv)
    try:
        _apply_config(args, parser)
        if hasattr(args, "ells") and not _parse_ells_ok(args):
            parser.error("empty ell list; pass --ells or set ells in the config")
        return args.func(args, parser)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
        return 2  # unreachable; parser.error exits


def _parse_ells_ok(args) -> bool:
    try:
        _parse_ells(args.ells)
        return True
    except ValueError:
        return False


if __name__ == "__main__":
    sys.exit(main())
