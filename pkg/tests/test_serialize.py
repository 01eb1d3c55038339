import json

import numpy as np
import pytest

import ballmult as bm
import ballmult.serialize as ser
from ballmult import (
    AutoBall,
    Dilate,
    MobiusDisk,
    PointConfiguration,
    PolyExpr,
    Polynomial,
    Product,
    Project,
    RationalExpr,
    StructureError,
    Sum,
)


def test_complex_and_matrix_roundtrip():
    c = 1.5 - 2.5j
    assert ser.complex_from_json(ser.complex_to_json(c)) == c
    m = np.array([[1 + 2j, 0], [3, -1j]])
    assert np.array_equal(ser.matrix_from_json(ser.matrix_to_json(m)), m)
    with pytest.raises(StructureError):
        ser.complex_from_json([1.0])


def test_tuple_roundtrip_and_header_check():
    T = bm.random_commuting_tuple(3, 2, seed=0)
    obj = ser.tuple_to_json(T)
    assert obj["d"] == 2 and obj["n"] == 3
    back = ser.tuple_from_json(obj)
    assert all(np.array_equal(a, b) for a, b in zip(T.entries, back.entries))
    obj["n"] = 5
    with pytest.raises(StructureError):
        ser.tuple_from_json(obj)


def test_polynomial_roundtrip():
    p = bm.random_polynomial(3, 3, seed=1)
    back = ser.polynomial_from_json(ser.polynomial_to_json(p))
    assert back == p


def test_expression_roundtrip_all_nodes():
    p = bm.random_polynomial(2, 2, seed=2)
    theta = bm.involution_at(np.array([0.2, -0.1j]))
    e = Sum(
        (
            AutoBall(theta, MobiusDisk(0.25 + 0.1j, Dilate(PolyExpr(p * 0.1), 0.7))),
            Product((PolyExpr(p), RationalExpr(p, Polynomial(2, {(0, 0): 1.0, (1, 0): -0.3})))),
            Project(bm.Embed(PolyExpr(p), 1), 2),
            bm.CoordLinear((1.0, 2.0j)),
        ),
        (1.0, 0.5j, -1.0, 2.0),
    )
    obj = ser.expr_to_json(e)
    json.dumps(obj)  # must be valid JSON data
    back = ser.expr_from_json(obj)
    rng = np.random.default_rng(3)
    z = rng.standard_normal((25, 2)) + 1j * rng.standard_normal((25, 2))
    z *= 0.5 / np.linalg.norm(z, axis=1, keepdims=True)
    assert np.abs(bm.eval_expr_point(e, z) - bm.eval_expr_point(back, z)).max() < 1e-14


def test_bare_autoball_roundtrip():
    theta = bm.involution_at(np.array([0.1, 0.2]))
    e = AutoBall(theta)
    back = ser.expr_from_json(ser.expr_to_json(e))
    assert back.child is None
    assert np.allclose(back.auto.base, theta.base)


def test_configuration_and_certificate_serialization():
    F = PointConfiguration(np.array([[0.4, 0.2], [0.1, -0.3]], dtype=complex))
    back = ser.configuration_from_json(ser.configuration_to_json(F))
    assert np.allclose(back.points, F.points)
    spec = bm.KernelSpec(1.0)
    cert = bm.pick_certificate([0.5, 0.2], F, spec, c=1.0)
    payload = ser.certificate_to_json(cert)
    json.dumps(payload)
    assert payload["feasible"] == cert.feasible
    assert ser.kernel_spec_from_json(ser.kernel_spec_to_json(spec)).a == 1.0


def test_automorphism_roundtrip():
    rng = np.random.default_rng(4)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    theta = bm.BallAutomorphism(base=np.array([0.1, 0.2j, -0.3]), unitary=q)
    back = ser.automorphism_from_json(ser.automorphism_to_json(theta))
    assert np.allclose(back.base, theta.base)
    assert np.allclose(back.unitary, theta.unitary)


def test_report_writers(tmp_path):
    rep = bm.ExperimentReport(
        name="demo",
        parameters={"x": 1},
        seed=7,
        rows=[{"k": 1, "v": 2.0}, {"k": 2, "v": 3.0}],
        summary={"best": 3.0},
        wall_time_s=0.1,
    )
    csv_path, json_path = ser.write_report(rep, tmp_path)
    assert csv_path.name == "demo-7.csv"
    assert json_path.name == "demo-7.json"
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "k,v" and len(lines) == 3
    payload = json.loads(json_path.read_text())
    assert payload["summary"]["best"] == 3.0


def test_search_trace_writer(tmp_path):
    path = ser.write_search_trace([(1, 0.5, 0), (4, 0.7, 2)], tmp_path / "trace.csv")
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iteration,best_value,configuration_id"
    assert lines[2] == "4,0.7,2"
