"""Command-line entry point.

Each run executes one command, writes machine-readable JSON/CSV artifacts
into the output directory, and prints a JSON summary (with a provenance
block: config hash, seed, package and library versions) on stdout.

Exit codes: 0 success; 1 precondition/structure/domain/configuration
errors; 2 numerical failures; 3 violated mathematical properties.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import config_hash, load_config, merge_config
from .errors import (
    BallmultError,
    ConfigurationError,
    DomainError,
    NumericalError,
    PreconditionError,
    PropertyViolation,
    StructureError,
)
from .experiments import cdn_lower_curve, vn_fuzz_campaign
from .gleason import SchurConfig, schur_construct
from .kernels import (
    KernelSpec,
    PointConfiguration,
    npoint_norm_search,
    pick_certificate,
    restriction_norm_bisection,
    restriction_norm_details,
)
from .tuples import (
    MatrixTuple,
    cauchy_integral_eval,
    eval_poly_tuple,
    eval_series_tuple,
    joint_spectrum,
    random_commuting_tuple,
    simultaneous_triangularize,
    validate_tuple,
)
from .expressions import eval_expr_tuple
from .polynomials import Polynomial, random_polynomial
from . import serialize as ser

COUNTEREXAMPLE_POINTS = np.array([[0.8, 0.2], [0.2, 0.8], [0.4, 0.4]], dtype=complex)
COUNTEREXAMPLE_POLY = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})


def _provenance(command: str, merged: dict) -> dict:
    return {
        "config_hash": config_hash(command, merged),
        "seed": merged["seed"],
        "versions": {
            "package": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
    }


def _resolve_threads(threads: int) -> int:
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def _load_tuple(params: dict, seed: int) -> MatrixTuple:
    if params.get("tuple"):
        with open(params["tuple"]) as fh:
            return ser.tuple_from_json(json.load(fh))
    if params.get("random"):
        bits = params["random"].split(",")
        if len(bits) not in (2, 3):
            raise StructureError("--random expects 'n,d[,kind]'")
        try:
            n, d = int(bits[0]), int(bits[1])
        except ValueError:
            raise StructureError(f"--random sizes must be integers, got {params['random']!r}")
        kind = bits[2] if len(bits) == 3 else "diagonal-conjugated"
        return random_commuting_tuple(n, d, seed=seed, kind=kind)
    raise StructureError("provide either a tuple file or a --random spec")


def _load_function(path: str | None):
    if not path:
        raise StructureError("a function file is required (expression tree or polynomial JSON)")
    with open(path) as fh:
        obj = json.load(fh)
    if isinstance(obj, dict) and "node" in obj:
        return ser.expr_from_json(obj)
    if isinstance(obj, dict) and "terms" in obj:
        from .expressions import PolyExpr

        return PolyExpr(ser.polynomial_from_json(obj))
    raise StructureError("function file must hold an expression tree or a polynomial")


def _write_json(out: Path, name: str, payload: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return path


# ----------------------------------------------------------------------
# command handlers: take (params, merged) and return (summary, exit_code)
# ----------------------------------------------------------------------


def _cmd_validate(params, merged, out):
    T = _load_tuple(params, merged["seed"])
    tol = merged["tolerances"]["commutation"]
    diag = validate_tuple(T, tol=tol)
    payload = {
        "commutation_residual": diag.commutation_residual,
        "row_norm": diag.row_norm,
        "is_row_contraction": diag.is_row_contraction,
        "n": diag.n,
        "d": diag.d,
    }
    _write_json(out, "validate.json", payload)
    return payload, 0


def _cmd_spectrum(params, merged, out):
    T = _load_tuple(params, merged["seed"])
    tri = simultaneous_triangularize(
        T,
        tol=merged["tolerances"]["triangularization"],
        commutation_tol=merged["tolerances"]["commutation"],
        seed=merged["seed"],
    )
    spec = joint_spectrum(T, seed=merged["seed"])
    payload = {
        "points": [ser.vector_to_json(p) for p in spec.points],
        "max_norm": spec.max_norm(),
        "triangularization_residual": tri.residual,
    }
    _write_json(out, "spectrum.json", payload)
    return payload, 0


def _cmd_pick_norm(params, merged, out):
    a = float(params.get("a", 1.0))
    spec = KernelSpec(a)
    if not params.get("points"):
        raise StructureError("pick-norm needs a --points configuration file")
    with open(params["points"]) as fh:
        F = ser.configuration_from_json(json.load(fh))
    if params.get("values"):
        with open(params["values"]) as fh:
            values = ser.vector_from_json(json.load(fh))
    elif params.get("function"):
        from .expressions import eval_expr_point

        values = np.atleast_1d(eval_expr_point(_load_function(params["function"]), F.points))
    else:
        raise StructureError("pick-norm needs values or a function")
    norm, method = restriction_norm_details(values, F, spec)
    cert = pick_certificate(values, F, spec, norm)
    payload = {
        "norm": norm,
        "method": method,
        "certificate": ser.certificate_to_json(cert),
        "a": a,
    }
    _write_json(out, "pick-norm.json", payload)
    return {"norm": norm, "method": method, "a": a}, 0


def _cmd_npoint_search(params, merged, out):
    a = float(params.get("a", 1.0))
    n = int(params.get("n", 2))
    budget = int(params.get("budget", 2000))
    starts = int(params.get("starts", 32))
    e = _load_function(params.get("function"))
    result = npoint_norm_search(
        e, n, KernelSpec(a), budget=budget, seed=merged["seed"], starts=starts
    )
    ser.write_search_trace(result.trace, out / "npoint-search-trace.csv")
    payload = {
        "lower_bound": result.value,
        "configuration": ser.configuration_to_json(result.config),
        "evaluations": result.evaluations,
        "n": n,
        "a": a,
    }
    _write_json(out, "npoint-search.json", payload)
    return {"lower_bound": result.value, "n": n, "a": a}, 0


def _cmd_three_point_check(params, merged, out):
    spec = KernelSpec(1.0)
    F = PointConfiguration(COUNTEREXAMPLE_POINTS)
    values = COUNTEREXAMPLE_POLY(F.points)
    cert = pick_certificate(values, F, spec, c=1.0)
    det = float(np.linalg.det(cert.pick_matrix).real)
    norm_closed, method = restriction_norm_details(values, F, spec)
    norm_bisect = restriction_norm_bisection(values, F, spec)
    agree = abs(norm_closed - norm_bisect) <= 1e-8 * max(1.0, norm_closed)
    payload = {
        "points": ser.configuration_to_json(F),
        "values": ser.vector_to_json(values),
        "pick_determinant": det,
        "pick_feasible_at_1": cert.feasible,
        "restriction_norm": norm_closed,
        "restriction_norm_bisection": norm_bisect,
        "methods_agree_1e-8": agree,
        "method": method,
    }
    _write_json(out, "three-point-check.json", payload)
    ok = det < 0 and norm_closed > 1 and agree
    return payload, 0 if ok else 3


def _cmd_schur(params, merged, out):
    a = float(params.get("a", 1.0))
    T = _load_tuple(params, merged["seed"])
    if params.get("function"):
        f = _load_function(params["function"])
    else:
        # demo-friendly default: a seeded random polynomial in T's variables
        from .expressions import PolyExpr

        f = PolyExpr(random_polynomial(T.d, 3, merged["seed"] + 1))
    table = {int(k): float(v) for k, v in merged["constants"].items()} or None
    cfg = SchurConfig(
        a=a,
        gleason_constant_table=table,
        quadrature_order=int(params.get("quadrature_order", 32)),
        sup_norm_budget=int(params.get("sup_budget", 2000)),
        safety_factor=float(params.get("safety", 1.05)),
        seed=merged["seed"],
    )
    res = schur_construct(f, T, cfg)
    fT = eval_expr_tuple(f, T)
    gT = eval_expr_tuple(res.g, T)
    residual = float(np.linalg.norm(gT - fT, 2) / (1.0 + np.linalg.norm(fT, 2)))
    payload = {
        "g": ser.expr_to_json(res.g),
        "certified_bound": res.certified_bound,
        "formula_bound": res.formula_bound,
        "bound_provenance": res.bound_provenance(),
        "evaluation_residual": residual,
        "trace": [
            {
                "level": rec.level,
                "path": list(rec.path),
                "base_point": ser.vector_to_json(rec.base_point),
                "c": ser.complex_to_json(rec.c),
                "branch_bound": rec.branch_bound,
            }
            for rec in res.trace
        ],
    }
    _write_json(out, "schur.json", payload)
    summary = {
        "certified_bound": res.certified_bound,
        "evaluation_residual": residual,
        "slack": res.slack,
    }
    if residual > 1e-6:
        return summary, 2
    return summary, 0


def _cmd_vn_fuzz(params, merged, out):
    n = int(params.get("n", 2))
    count = int(params.get("budget", 1000))  # campaign budget: instance count
    est_budget = int(params.get("est_budget", 192))
    threads = _resolve_threads(merged["threads"])
    report = vn_fuzz_campaign(
        n,
        count,
        seed=merged["seed"],
        budget=est_budget,
        d_max=int(params.get("d_max", 4)),
        degree_max=int(params.get("degree_max", 4)),
        threads=threads,
    )
    ser.write_report(report, out)
    summary = dict(report.summary)
    if n == 2 and summary["max_ratio"] > 1.0 + 1e-6:
        return summary, 3
    return summary, 0


def _cmd_cdn_curve(params, merged, out):
    d = int(params.get("d", 2))
    k_max = int(params.get("k_max", 4))
    report = cdn_lower_curve(
        d,
        k_max,
        trials_per_k=int(params.get("trials", 64)),
        budget=int(params.get("budget", 2048)),
        seed=merged["seed"],
    )
    ser.write_report(report, out)
    ratios = report.summary["ratios"]
    summary = {"ratios": ratios}
    if d == 1 and any(r > 1.0 + 1e-8 for r in ratios):
        return summary, 3
    if any(b < a_ - 1e-9 for a_, b in zip(ratios, ratios[1:])):
        return summary, 3
    return summary, 0


def _cmd_fc_check(params, merged, out):
    count = int(params.get("count", 5))
    n = int(params.get("n", 3))
    d = int(params.get("d", 2))
    samples = int(params.get("samples", 50_000))
    rng = np.random.default_rng(merged["seed"])
    rows = []
    worst_sigma = 0.0
    for i in range(count):
        T = random_commuting_tuple(n, d, seed=int(rng.integers(0, 2**63)), spectral_radius=0.7)
        p = random_polynomial(d, 3, int(rng.integers(0, 2**63)))
        series = eval_series_tuple(p, T)
        direct = eval_poly_tuple(p, T)
        mc = cauchy_integral_eval(p, T, sample_count=samples, seed=int(rng.integers(0, 2**63)))
        dev = float(np.linalg.norm(mc.value - series.value))
        sigmas = dev / max(mc.standard_error, 1e-300)
        worst_sigma = max(worst_sigma, sigmas)
        rows.append(
            {
                "instance": i,
                "series_vs_direct": float(np.linalg.norm(series.value - direct)),
                "cauchy_deviation": dev,
                "standard_error": mc.standard_error,
                "sigmas": sigmas,
            }
        )
    payload = {"rows": rows, "worst_sigmas": worst_sigma}
    _write_json(out, "fc-check.json", payload)
    summary = {"worst_sigmas": worst_sigma, "count": count}
    return summary, 0 if worst_sigma <= 3.0 else 3


_HANDLERS = {
    "validate": _cmd_validate,
    "spectrum": _cmd_spectrum,
    "pick-norm": _cmd_pick_norm,
    "npoint-search": _cmd_npoint_search,
    "three-point-check": _cmd_three_point_check,
    "schur": _cmd_schur,
    "vn-fuzz": _cmd_vn_fuzz,
    "cdn-curve": _cmd_cdn_curve,
    "fc-check": _cmd_fc_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballmult",
        description="Multiplier-norm machinery for commuting matrix tuples on the unit ball.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker count; 1 is bit-identical")
        p.add_argument("--tol", type=float, default=None, help="commutation tolerance override")

    p = sub.add_parser("validate", help="tuple diagnostics")
    common(p)
    p.add_argument("--tuple", help="matrix tuple JSON file")
    p.add_argument("--random", help="'n,d[,kind]' generator spec")

    p = sub.add_parser("spectrum", help="joint spectrum via triangularization")
    common(p)
    p.add_argument("--tuple", help="matrix tuple JSON file")
    p.add_argument("--random", help="'n,d[,kind]' generator spec")

    p = sub.add_parser("pick-norm", help="restriction multiplier norm at points")
    common(p)
    p.add_argument("--points", help="point configuration JSON file")
    p.add_argument("--values", help="values JSON file")
    p.add_argument("--function", help="expression JSON file")
    p.add_argument("--a", type=float, default=None, help="kernel parameter")

    p = sub.add_parser("npoint-search", help="maximize the restriction norm over configurations")
    common(p)
    p.add_argument("--function", help="expression JSON file")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--starts", type=int, default=None)

    p = sub.add_parser("three-point-check", help="the 3x3 counterexample instance end-to-end")
    common(p)

    p = sub.add_parser("schur", help="construct g with g(T) = f(T) and a certified bound")
    common(p)
    p.add_argument("--function", help="expression JSON file")
    p.add_argument("--tuple", help="matrix tuple JSON file")
    p.add_argument("--random", help="'n,d[,kind]' generator spec")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--sup-budget", dest="sup_budget", type=int, default=None)
    p.add_argument("--quadrature-order", dest="quadrature_order", type=int, default=None)
    p.add_argument("--safety", type=float, default=None)

    p = sub.add_parser("vn-fuzz", help="random row-contraction ratio campaign")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--budget", type=int, default=None, help="number of random instances")
    p.add_argument("--est-budget", dest="est_budget", type=int, default=None,
                   help="per-instance sup-norm estimator budget")
    p.add_argument("--d-max", dest="d_max", type=int, default=None)
    p.add_argument("--degree-max", dest="degree_max", type=int, default=None)

    p = sub.add_parser("cdn-curve", help="growth curve on compressed shifts")
    common(p)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--k-max", dest="k_max", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)

    p = sub.add_parser("fc-check", help="series vs Cauchy-integral functional calculus")
    common(p)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    t0 = time.perf_counter()
    try:
        file_cfg = load_config(args.config)
        flags = {
            k: v
            for k, v in vars(args).items()
            if k not in ("command", "config", "tol") and v is not None
        }
        merged = merge_config(command, file_cfg, flags)
        if args.tol is not None:
            merged["tolerances"]["commutation"] = args.tol
        out = Path(merged["out"])
        summary, code = _HANDLERS[command](merged["params"], merged, out)
    except (StructureError, PreconditionError, DomainError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except PropertyViolation as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BallmultError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = {
        "command": command,
        "summary": summary,
        "provenance": _provenance(command, merged),
        "wall_time_s": time.perf_counter() - t0,
        "out_dir": str(out),
    }
    print(json.dumps(result, indent=2, sort_keys=True, default=float))
    if code == 3:
        print("property violation detected; see summary", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
