"""JSON wire formats.

Complex scalars are [re, im] pairs; matrices are row-major lists of such
pairs; a matrix tuple is {"d": ..., "n": ..., "entries": [...]}.  Function
expressions serialize to trees tagged by node type.  Documented in the
README under "File formats".
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .automorphisms import BallAutomorphism
from .errors import StructureError
from .expressions import (
    AutoBall,
    CoordLinear,
    Dilate,
    Embed,
    FunctionExpr,
    MobiusDisk,
    PolyExpr,
    Product,
    Project,
    RationalExpr,
    Sum,
)
from .kernels import KernelSpec, PickCertificate, PointConfiguration
from .polynomials import Polynomial
from .tuples import MatrixTuple


def complex_to_json(c: complex) -> list:
    c = complex(c)
    return [c.real, c.imag]


def complex_from_json(obj) -> complex:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise StructureError(f"expected [re, im], got {obj!r}")
    return complex(obj[0], obj[1])


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(x) for x in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    return np.array([[complex_from_json(x) for x in row] for row in obj], dtype=complex)


def vector_to_json(v: np.ndarray) -> list:
    return [complex_to_json(x) for x in np.asarray(v, dtype=complex).reshape(-1)]


def vector_from_json(obj) -> np.ndarray:
    return np.array([complex_from_json(x) for x in obj], dtype=complex)


def tuple_to_json(T: MatrixTuple) -> dict:
    return {"d": T.d, "n": T.n, "entries": [matrix_to_json(a) for a in T.entries]}


def tuple_from_json(obj) -> MatrixTuple:
    for key in ("d", "n", "entries"):
        if key not in obj:
            raise StructureError(f"matrix tuple JSON missing key {key!r}")
    T = MatrixTuple([matrix_from_json(e) for e in obj["entries"]])
    if T.d != obj["d"] or T.n != obj["n"]:
        raise StructureError("matrix tuple JSON header disagrees with entries")
    return T


def polynomial_to_json(p: Polynomial) -> dict:
    return {
        "d": p.d,
        "terms": [
            {"alpha": list(a), "coeff": complex_to_json(c)} for a, c in sorted(p.terms.items())
        ],
    }


def polynomial_from_json(obj) -> Polynomial:
    return Polynomial(
        obj["d"],
        {tuple(t["alpha"]): complex_from_json(t["coeff"]) for t in obj["terms"]},
    )


def automorphism_to_json(theta: BallAutomorphism) -> dict:
    return {"base": vector_to_json(theta.base), "unitary": matrix_to_json(theta.unitary)}


def automorphism_from_json(obj) -> BallAutomorphism:
    return BallAutomorphism(
        base=vector_from_json(obj["base"]), unitary=matrix_from_json(obj["unitary"])
    )


def expr_to_json(e: FunctionExpr) -> dict:
    if isinstance(e, PolyExpr):
        return {"node": "poly", "poly": polynomial_to_json(e.poly)}
    if isinstance(e, CoordLinear):
        return {"node": "coord_linear", "coeffs": [complex_to_json(c) for c in e.coeffs]}
    if isinstance(e, RationalExpr):
        return {
            "node": "rational",
            "num": polynomial_to_json(e.num),
            "den": polynomial_to_json(e.den),
        }
    if isinstance(e, MobiusDisk):
        return {"node": "mobius_disk", "c": complex_to_json(e.c), "child": expr_to_json(e.child)}
    if isinstance(e, AutoBall):
        return {
            "node": "auto_ball",
            "auto": automorphism_to_json(e.auto),
            "child": None if e.child is None else expr_to_json(e.child),
        }
    if isinstance(e, Embed):
        return {"node": "embed", "dim_in": e.dim_in, "child": expr_to_json(e.child)}
    if isinstance(e, Project):
        return {"node": "project", "dim_in": e.dim_in, "child": expr_to_json(e.child)}
    if isinstance(e, Sum):
        return {
            "node": "sum",
            "coeffs": [complex_to_json(c) for c in e.coeffs],
            "children": [expr_to_json(k) for k in e.children],
        }
    if isinstance(e, Product):
        return {"node": "product", "children": [expr_to_json(k) for k in e.children]}
    if isinstance(e, Dilate):
        return {"node": "dilate", "t": complex_to_json(e.t), "child": expr_to_json(e.child)}
    raise StructureError(f"cannot serialize node {type(e)!r}")


def expr_from_json(obj) -> FunctionExpr:
    if not isinstance(obj, dict) or "node" not in obj:
        raise StructureError("expression JSON must be an object with a 'node' tag")
    tag = obj["node"]
    if tag == "poly":
        return PolyExpr(polynomial_from_json(obj["poly"]))
    if tag == "coord_linear":
        return CoordLinear(tuple(complex_from_json(c) for c in obj["coeffs"]))
    if tag == "rational":
        return RationalExpr(polynomial_from_json(obj["num"]), polynomial_from_json(obj["den"]))
    if tag == "mobius_disk":
        return MobiusDisk(complex_from_json(obj["c"]), expr_from_json(obj["child"]))
    if tag == "auto_ball":
        child = None if obj.get("child") is None else expr_from_json(obj["child"])
        return AutoBall(automorphism_from_json(obj["auto"]), child)
    if tag == "embed":
        return Embed(expr_from_json(obj["child"]), int(obj["dim_in"]))
    if tag == "project":
        return Project(expr_from_json(obj["child"]), int(obj["dim_in"]))
    if tag == "sum":
        return Sum(
            tuple(expr_from_json(k) for k in obj["children"]),
            tuple(complex_from_json(c) for c in obj["coeffs"]),
        )
    if tag == "product":
        return Product(tuple(expr_from_json(k) for k in obj["children"]))
    if tag == "dilate":
        return Dilate(expr_from_json(obj["child"]), complex_from_json(obj["t"]))
    raise StructureError(f"unknown expression node tag {tag!r}")


def configuration_to_json(F: PointConfiguration) -> dict:
    return {"points": [vector_to_json(p) for p in F.points]}


def configuration_from_json(obj) -> PointConfiguration:
    return PointConfiguration(np.array([vector_from_json(p) for p in obj["points"]]))


def kernel_spec_to_json(spec: KernelSpec) -> dict:
    return {"a": spec.a}


def kernel_spec_from_json(obj) -> KernelSpec:
    return KernelSpec(float(obj["a"]))


def certificate_to_json(cert: PickCertificate) -> dict:
    return {
        "c": cert.c,
        "pick_matrix": matrix_to_json(cert.pick_matrix),
        "min_eigenvalue": cert.min_eigenvalue,
        "feasible": cert.feasible,
    }


def write_report(report, out_dir) -> tuple[Path, Path]:
    """<name>-<seed>.csv with the rows, <name>-<seed>.json with everything."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{report.name}-{report.seed}"
    csv_path = out / f"{stem}.csv"
    json_path = out / f"{stem}.json"
    with open(csv_path, "w", newline="") as fh:
        if report.rows:
            writer = csv.DictWriter(fh, fieldnames=list(report.rows[0].keys()))
            writer.writeheader()
            writer.writerows(report.rows)
        else:
            fh.write("")
    payload = {
        "name": report.name,
        "parameters": report.parameters,
        "seed": report.seed,
        "summary": report.summary,
        "wall_time_s": report.wall_time_s,
        "metadata": report.metadata,
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return csv_path, json_path


def write_search_trace(trace, path) -> Path:
    """CSV trace of an n-point search: iteration, best value, configuration id."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_value", "configuration_id"])
        writer.writerows(trace)
    return path
