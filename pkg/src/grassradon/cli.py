"""Command-line front end: run checks and suites, evaluate the transform,
build profiles, run the rank-one inversion demo, emit JSON/CSV reports.

Exit codes: 0 all requested checks passed, 1 a check failed, 2 usage or
config error. Every JSON document carries a header with version, backend,
seed and the full config; wall-clock times live in a separate trailer so
the rest of the document is byte-reproducible for a fixed seed.
"""

import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__, backend
from . import algebra as la
from . import operators as op
from .checks import CHECKS, default_manifest, inversion_round_trip, run_check, run_suite
from .cone import gamma_cone
from .fields import field_from_string
from .sampling import haar_stiefel, parse_seed, stream, subseed

DEFAULT_SEED = 20260808


def _header(command, seed, config):
    return {
        "tool": "grassradon",
        "version": __version__,
        "backend": backend.backend_name(),
        "command": command,
        "seed": seed,
        "config": config,
    }


def _flatten_configs(reports):
    keys = []
    for r in reports:
        for key in r["config"]:
            if key not in keys:
                keys.append(key)
    return keys


def emit_report(reports, fmt, out, header=None, summary=None, runtimes=None):
    """Serialize reports; JSON keeps a stable field order with runtimes in a
    trailer, CSV emits one row per check with flattened config columns."""
    if not reports:
        raise ValueError("no reports to emit")
    if fmt == "json":
        doc = {}
        if header is not None:
            doc["header"] = header
        doc["reports"] = reports
        if summary is not None:
            doc["summary"] = summary
        if runtimes is not None:
            doc["trailer"] = {"runtime_ms": runtimes}
        text = json.dumps(doc, indent=2) + "\n"
    elif fmt == "csv":
        cfg_keys = _flatten_configs(reports)
        cols = ["check_id", *cfg_keys, "estimate", "stderr", "reference",
                "provenance", "z_score", "pass", "n_samples", "seed"]
        buf = io.StringIO()
        buf.write(",".join(cols) + "\n")
        for r in reports:
            row = [str(r["check_id"])]
            row += [repr(r["config"].get(key, "")) for key in cfg_keys]
            row += [repr(r[key]) for key in
                    ("estimate", "stderr", "reference", "provenance", "z_score",
                     "pass", "n_samples", "seed")]
            buf.write(",".join(row) + "\n")
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p):
    p.add_argument("--seed", default=None,
                   help="decimal or hex seed (default: GRASSRADON_SEED or builtin)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--shards", type=int, default=max(1, os.cpu_count() or 1))
    p.add_argument("--out", default=None, help="write report to this path")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _resolve_seed(args):
    raw = args.seed if args.seed is not None else os.environ.get("GRASSRADON_SEED", DEFAULT_SEED)
    return parse_seed(raw)


def build_parser():
    p = argparse.ArgumentParser(prog="grassradon", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list-checks", help="enumerate the check ids")

    pc = sub.add_parser("check", help="run one named check")
    pc.add_argument("check_id")
    pc.add_argument("--field", default="R")
    pc.add_argument("--n", type=int, default=None)
    pc.add_argument("--k", type=int, default=None)
    pc.add_argument("--kprime", type=int, default=None)
    pc.add_argument("--lam", "--lambda", dest="lam", type=float, default=None)
    pc.add_argument("--mu", type=float, default=None)
    pc.add_argument("--eps", type=float, default=None)
    pc.add_argument("--m", type=int, default=None)
    pc.add_argument("--q", type=float, default=None)
    pc.add_argument("--points", type=int, default=None)
    pc.add_argument("--fit-degree", type=int, default=None)
    pc.add_argument("--tol", type=float, default=None)
    pc.add_argument("--z-max", type=float, default=None)
    _add_common(pc)

    ps = sub.add_parser("suite", help="run a manifest of checks (default: builtin)")
    ps.add_argument("manifest", nargs="?", default=None, help="JSON manifest path")
    _add_common(ps)

    pg = sub.add_parser("gamma", help="evaluate the cone Gamma product formula")
    pg.add_argument("--field", default="R")
    pg.add_argument("--k", type=int, default=1)
    pg.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    pg.add_argument("--out", default=None)

    pr = sub.add_parser("radon-eval", help="transform of a trace quadratic vs closed form")
    pr.add_argument("--field", default="R")
    pr.add_argument("--n", type=int, default=4)
    pr.add_argument("--k", type=int, default=1)
    pr.add_argument("--kprime", type=int, default=2)
    _add_common(pr)

    pp = sub.add_parser("profile", help="angle profile of a transformed function (k = 1)")
    pp.add_argument("--field", default="R")
    pp.add_argument("--n", type=int, default=4)
    pp.add_argument("--kprime", type=int, default=2)
    pp.add_argument("--grid-size", type=int, default=24)
    pp.add_argument("--lo", type=float, default=0.02)
    pp.add_argument("--hi", type=float, default=0.98)
    _add_common(pp)

    pi = sub.add_parser("invert-k1", help="full rank-one inversion round trip")
    pi.add_argument("--field", default="R")
    pi.add_argument("--n", type=int, default=4)
    pi.add_argument("--kprime", type=int, default=2)
    pi.add_argument("--points", type=int, default=5)
    pi.add_argument("--fit-degree", type=int, default=None)
    pi.add_argument("--m", type=int, default=None)
    _add_common(pi)
    return p


def _cmd_check(args):
    seed = _resolve_seed(args)
    config = {"field": args.field, "seed": seed}
    for key in ("n", "k", "kprime", "lam", "mu", "eps", "m", "q", "points",
                "samples", "shards", "tol"):
        val = getattr(args, key, None)
        if val is not None:
            config[key] = val
    if args.fit_degree is not None:
        config["fit_degree"] = args.fit_degree
    if args.z_max is not None:
        config["z_max"] = args.z_max
    report = run_check(args.check_id, config)
    emit_report([report.to_dict()], args.format, args.out,
                header=_header("check", seed, config),
                summary={"total": 1, "passed": int(report.passed)},
                runtimes=[report.runtime_ms])
    return 0 if report.passed else 1


def _cmd_suite(args):
    seed = _resolve_seed(args)
    if args.manifest:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
        if isinstance(manifest, dict):
            manifest = manifest["checks"]
    else:
        manifest = default_manifest(samples=args.samples, seed=seed)
    if args.shards:
        for entry in manifest:
            entry.setdefault("config", {}).setdefault("shards", args.shards)
    reports, summary = run_suite(manifest)
    emit_report([r.to_dict() for r in reports], args.format, args.out,
                header=_header("suite", seed, {"manifest": args.manifest or "default"}),
                summary=summary, runtimes=[r.runtime_ms for r in reports])
    return 0 if summary["failed"] == 0 else 1


def _cmd_gamma(args):
    field = field_from_string(args.field)
    value = gamma_cone(field, args.k, args.lam)
    doc = {"field": field.name, "k": args.k, "lam": args.lam, "gamma_cone": value}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_radon_eval(args):
    seed = _resolve_seed(args)
    field = field_from_string(args.field)
    n, k, kp = args.n, args.k, args.kprime
    if not 1 <= k <= kp <= n - 1:
        raise ValueError("need 1 <= k <= k' <= n - 1")
    samples = args.samples or 100_000
    a = stream(subseed(seed, 1)).standard_normal((n, n, field.d))
    a = 0.5 * (a + la.adjoint(a))
    f = op.trace_quadratic(field, n, k, a)
    eta = haar_stiefel(field, n, kp, stream(subseed(seed, 2)), 1)[0]
    est = op.radon(f, eta, samples, subseed(seed, 3), shards=args.shards)
    ref = op.radon_closed_form_quadratic(field, k, kp, a, eta)
    z = est.z_against(ref)
    report = {
        "check_id": "radon_eval",
        "config": {"field": field.name, "n": n, "k": k, "kprime": kp,
                   "samples": samples, "seed": seed},
        "estimate": est.mean, "stderr": est.stderr, "reference": ref,
        "provenance": "DERIVED", "z_score": z, "pass": bool(abs(z) <= 3.0),
        "n_samples": samples, "seed": seed, "detail": {},
    }
    emit_report([report], args.format, args.out,
                header=_header("radon-eval", seed, report["config"]),
                summary={"total": 1, "passed": int(report["pass"])}, runtimes=[0])
    return 0 if report["pass"] else 1


def _cmd_profile(args):
    seed = _resolve_seed(args)
    field = field_from_string(args.field)
    n, kp = args.n, args.kprime
    samples = args.samples or 50_000
    a = stream(subseed(seed, 1)).standard_normal((n, n, field.d))
    a = 0.5 * (a + la.adjoint(a))
    f = op.trace_quadratic(field, n, 1, a)
    phi = op.radon_function(f, kp)
    x = haar_stiefel(field, n, 1, stream(subseed(seed, 2)), 1)[0]
    grid = op.chebyshev_grid(args.lo, args.hi, args.grid_size)
    prof = op.phi_profile(phi, x, grid, samples, subseed(seed, 3), shards=args.shards)
    reports = [
        {
            "check_id": "profile_point",
            "config": {"field": field.name, "n": n, "kprime": kp, "s": float(s),
                       "samples": samples, "seed": int(prof.seeds[i])},
            "estimate": prof.values[i].mean, "stderr": prof.values[i].stderr,
            "reference": float("nan"), "provenance": "", "z_score": 0.0,
            "pass": True, "n_samples": samples, "seed": int(prof.seeds[i]),
            "detail": {},
        }
        for i, s in enumerate(grid)
    ]
    emit_report(reports, args.format, args.out,
                header=_header("profile", seed,
                               {"field": field.name, "n": n, "kprime": kp,
                                "samples": samples, "grid_size": args.grid_size}),
                summary={"total": len(reports), "passed": len(reports)},
                runtimes=[0] * len(reports))
    return 0


def _cmd_invert(args):
    seed = _resolve_seed(args)
    field = field_from_string(args.field)
    samples = args.samples or 200_000
    rel_l2, const_err, detail = inversion_round_trip(
        field, args.n, args.kprime, args.points, samples, seed,
        fit_degree=args.fit_degree, m=args.m, shards=args.shards,
    )
    passed = rel_l2 <= 0.05 and const_err <= 0.02
    config = {"field": field.name, "n": args.n, "kprime": args.kprime,
              "points": args.points, "samples": samples, "seed": seed}
    report = {
        "check_id": "inversion_k1", "config": config,
        "estimate": rel_l2, "stderr": 0.0, "reference": 0.0,
        "provenance": "DERIVED", "z_score": 3.0 * rel_l2 / 0.05,
        "pass": bool(passed), "n_samples": samples, "seed": seed,
        "detail": {**detail, "constant_error": const_err},
    }
    emit_report([report], args.format, args.out,
                header=_header("invert-k1", seed, config),
                summary={"total": 1, "passed": int(passed)}, runtimes=[0])
    if not args.out and args.format == "json":
        for got, want in zip(detail["recovered"], detail["truth"]):
            sys.stderr.write(f"  recovered {got:+.5f}  truth {want:+.5f}  err {got-want:+.5f}\n")
        sys.stderr.write(f"  relative l2 error {rel_l2:.3%}; constant recovered to {const_err:.3%}\n")
    return 0 if passed else 1


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "list-checks":
            for cid in CHECKS:
                sys.stdout.write(f"{cid}\n")
            return 0
        handler = {
            "check": _cmd_check,
            "suite": _cmd_suite,
            "gamma": _cmd_gamma,
            "radon-eval": _cmd_radon_eval,
            "profile": _cmd_profile,
            "invert-k1": _cmd_invert,
        }[args.command]
        return handler(args)
    except (ValueError, OSError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
