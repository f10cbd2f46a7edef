"""Batch front end: describe a model, run verification suites, emit reports.

Subcommands:
  describe   print model dimensions and the fixed convention constants
  check      run the invariant suites (conical geometry, rigid structure,
             moment maps, group law, twist, Killing fields)
  curvature  per-point curvature scalars and the Einstein/constancy checks
  isometry   isometry + effectiveness campaign for random group elements

Exit codes: 0 all suites pass, 1 some suite failed, 2 configuration error.
Reports are deterministic JSON (plus a CSV table for curvature); timing is
printed to stdout only so identical config + seed gives identical bytes.
The QMAPLAB_THREADS environment variable parallelizes curvature points.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import suites
from .errors import GeometryError, ModelFormatError
from .special_geometry import (cask_tensors, load_model, CaskPoint,
                               tau_and_validity)

_DOMAIN_DESCRIPTIONS = {
    "positive_orthant": "every t^a > 0 (and h(t) > 0)",
}


def _add_common(p):
    p.add_argument("--model", required=True,
                   help="model file path or builtin name (E1, E2)")
    p.add_argument("--c", default="0.0",
                   help="one-loop parameter, comma-separated list allowed")
    p.add_argument("--mode", choices=("circle", "cover"), default="circle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", default="",
                   help="sample-count overrides, e.g. points=10,elements=20")
    p.add_argument("--out", default=None, help="JSON report path")
    for name in sorted(suites.DEFAULT_TOLERANCES):
        p.add_argument(f"--tol-{name}", type=float, default=None,
                       help=argparse.SUPPRESS)


def _parse_common(args):
    model = load_model(args.model)
    cs = []
    for part in str(args.c).split(","):
        part = part.strip()
        if part:
            c = float(part)
            if c < 0:
                raise ModelFormatError(f"one-loop parameter must be >= 0, got {c}")
            cs.append(c)
    if not cs:
        cs = [0.0]
    samples = {}
    for item in args.samples.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ModelFormatError(f"bad --samples entry {item!r} (expected k=v)")
        key, val = item.split("=", 1)
        samples[key.strip()] = int(val)
    tolerances = {}
    for name in suites.DEFAULT_TOLERANCES:
        override = getattr(args, f"tol_{name}".replace("-", "_"), None)
        if override is not None:
            tolerances[name] = override
    return model, cs, samples, tolerances


def _config_block(args, model, cs, samples, tolerances):
    return {
        "command": args.command,
        "model": model.name,
        "c": cs,
        "mode": args.mode,
        "seed": args.seed,
        "samples": {**suites.DEFAULT_SAMPLES, **samples},
        "tolerances": {**suites.DEFAULT_TOLERANCES, **tolerances},
    }


def _result_block(res):
    return {
        "suite": res.name,
        "status": res.status,
        "max_residual": res.max_residual,
        "tolerance": res.tolerance,
        "count": res.count,
        "details": res.details,
        "worst_point": res.worst_point,
    }


def _emit(report, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"report written to {out_path}")


def _print_summary(results, elapsed):
    for res in results:
        worst = res.details.get("worst_check", "")
        print(f"  {res.status:4s} {res.name:20s} max residual {res.max_residual:.3e}"
              f" (tol {res.tolerance:.0e})"
              + (f"  [{worst}]" if worst else ""))
    print(f"elapsed: {elapsed:.1f}s")


def cmd_describe(args):
    model, cs, samples, tolerances = _parse_common(args)
    n = model.n
    print(f"model {model.name}: m={model.m}, n={n}, dim Nbar={4 * n}")
    print(f"cubic coefficients: {int(np.count_nonzero(model.k))} nonzero entries")
    print(f"domain predicate: {_DOMAIN_DESCRIPTIONS.get(model.domain_id, model.domain_id)}")
    print(f"declared hypersurface samples: {model.hsurface_samples}")
    print(f"automorphism generators on file: {len(model.aut_generators)}")
    # convention constants, measured at a reference point
    pt = CaskPoint.from_chart(model, 1.0, 0.2,
                              0.1 * np.ones(model.m),
                              np.array([0.5 * (lo + hi) for lo, hi in model.t_box]))
    ct = cask_tensors(model, pt)
    kappa = float(ct.omega[0, n])
    _, sig, pairing, ok = tau_and_validity(model, pt.X)
    print(f"flat-frame pairing constant kappa = {kappa:g} "
          f"(omega = kappa dx^i wedge dy_i)")
    print(f"sign table at reference point: f = {ct.f:.6g} < 0, "
          f"f_Z^0 = {-ct.f:.6g} > 0, f_H^0 = {ct.f:.6g} < 0")
    print(f"Im(tau) signature: {sig}, pairing {pairing:.6g} < 0, valid: {ok}")
    return 0


def cmd_check(args):
    model, cs, samples, tolerances = _parse_common(args)
    rng = np.random.default_rng(args.seed)
    t0 = time.time()
    results = []
    heavy = not args.quick
    for i, c in enumerate(cs):
        batch = suites.run_check_suites(model, c, rng, args.mode, samples,
                                        tolerances, heavy=heavy)
        # the c-independent suites only need to run once
        results.extend(batch if i == 0 else
                       [r for r in batch if "[c=" in r.name])
    elapsed = time.time() - t0
    print(f"check: model {model.name}, c={cs}, mode {args.mode}, seed {args.seed}")
    _print_summary(results, elapsed)
    report = _config_block(args, model, cs, samples, tolerances)
    report["suites"] = [_result_block(r) for r in results]
    _emit(report, args.out)
    return 0 if all(r.passed for r in results) else 1


def cmd_curvature(args):
    model, cs, samples, tolerances = _parse_common(args)
    rng = np.random.default_rng(args.seed)
    t0 = time.time()
    res, rows = suites.suite_curvature(model, cs, rng, samples, tolerances)
    elapsed = time.time() - t0
    if res.status == "SKIP":
        print(f"curvature: SKIP ({res.details.get('error', 'no valid points')})")
        return 2
    print(f"curvature: model {model.name}, c={cs}, seed {args.seed}")
    _print_summary([res], elapsed)
    for row in rows:
        print(f"  c={row['c']:<5g} point {row['point']}: scal={row['scal']:+.9e} "
              f"kret={row['kretschmann']:.9e} einstein={row['einstein_residual']:.3e}")
    report = _config_block(args, model, cs, samples, tolerances)
    report["suites"] = [_result_block(res)]
    report["curvature_table"] = rows
    _emit(report, args.out)
    if args.out:
        csv_path = args.out.rsplit(".", 1)[0] + ".csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=[
                "c", "point", "scal", "kretschmann", "einstein_residual",
                "pair_symmetry", "bianchi"])
            writer.writeheader()
            writer.writerows(rows)
        print(f"curvature table written to {csv_path}")
    return 0 if res.passed else 1


def cmd_isometry(args):
    model, cs, samples, tolerances = _parse_common(args)
    rng = np.random.default_rng(args.seed)
    t0 = time.time()
    results = []
    for c in cs:
        results.append(suites.suite_isometry(model, c, rng, args.mode,
                                             samples, tolerances))
    elapsed = time.time() - t0
    print(f"isometry: model {model.name}, c={cs}, mode {args.mode}, seed {args.seed}")
    _print_summary(results, elapsed)
    report = _config_block(args, model, cs, samples, tolerances)
    report["suites"] = [_result_block(r) for r in results]
    _emit(report, args.out)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qmaplab",
        description="verification laboratory for one-loop deformed q-map metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="print model dimensions and conventions")
    _add_common(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("check", help="run the invariant suites")
    _add_common(p)
    p.add_argument("--quick", action="store_true",
                   help="skip the jet-heavy twist and Killing suites")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("curvature", help="curvature scalars and Einstein checks")
    _add_common(p)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("isometry", help="isometry and effectiveness campaign")
    _add_common(p)
    p.set_defaults(func=cmd_isometry)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelFormatError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"geometry failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
