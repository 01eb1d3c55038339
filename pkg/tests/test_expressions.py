import numpy as np
import pytest

import ballmult as bm
from ballmult import (
    AutoBall,
    CoordLinear,
    Dilate,
    DomainError,
    Embed,
    MatrixTuple,
    MobiusDisk,
    PolyExpr,
    Polynomial,
    Product,
    Project,
    RationalExpr,
    StructureError,
    Sum,
)

from test_tuples import match_multisets


def ball_points(seed, count, d, radius=0.6):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, d)) + 1j * rng.standard_normal((count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.uniform(0.2, 1.0, (count, 1)))


# -- point evaluation ------------------------------------------------------


def test_poly_value_at_named_point():
    e = PolyExpr(Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0}))
    v = bm.eval_expr_point(e, np.array([0.4, 0.4]))
    assert v == pytest.approx(8 / 25)


def test_mobius_vanishes_at_its_parameter():
    c = 0.3 - 0.4j
    e = MobiusDisk(c, PolyExpr(Polynomial.coordinate(0, 1)))
    assert abs(bm.eval_expr_point(e, np.array([c]))) < 1e-15


def test_mobius_is_involution():
    c = 0.35 + 0.2j
    w = PolyExpr(Polynomial.coordinate(0, 1))
    e = MobiusDisk(c, MobiusDisk(c, w))
    z = ball_points(0, 100, 1, radius=0.9)
    assert np.abs(bm.eval_expr_point(e, z) - z[:, 0]).max() < 1e-12


def test_domain_error_names_node():
    e = MobiusDisk(0.0, PolyExpr(Polynomial.constant(2.0, 1)))
    with pytest.raises(DomainError, match="MobiusDisk"):
        bm.eval_expr_point(e, np.array([0.1]))


def test_sum_product_dilate_embed_project():
    p = Polynomial(2, {(1, 0): 1.0})
    q = Polynomial(2, {(0, 1): 1.0})
    z = np.array([0.2 + 0.1j, -0.3])
    s = Sum((PolyExpr(p), PolyExpr(q)), (2.0, -1j))
    assert bm.eval_expr_point(s, z) == pytest.approx(2 * z[0] - 1j * z[1])
    pr = Product((PolyExpr(p), PolyExpr(q)))
    assert bm.eval_expr_point(pr, z) == pytest.approx(z[0] * z[1])
    di = Dilate(PolyExpr(p), 0.5)
    assert bm.eval_expr_point(di, z) == pytest.approx(0.5 * z[0])
    em = Embed(PolyExpr(p), 1)  # z in C^1 -> p(z, 0)
    assert bm.eval_expr_point(em, np.array([0.7])) == pytest.approx(0.7)
    pj = Project(PolyExpr(Polynomial.coordinate(0, 1)), 2)
    assert bm.eval_expr_point(pj, z) == pytest.approx(z[0])
    cl = CoordLinear((2.0, 3.0))
    assert bm.eval_expr_point(cl, z) == pytest.approx(2 * z[0] + 3 * z[1])
    ra = RationalExpr(p, Polynomial(2, {(0, 0): 1.0, (1, 0): -0.5}))
    assert bm.eval_expr_point(ra, z) == pytest.approx(z[0] / (1 - 0.5 * z[0]))


def test_sum_flattens_nested():
    p = PolyExpr(Polynomial.coordinate(0, 1))
    inner = Sum((p, p), (1.0, 2.0))
    outer = Sum((inner, p), (3.0, 1.0))
    assert all(not isinstance(k, Sum) for k in outer.children)
    z = np.array([0.25])
    assert bm.eval_expr_point(outer, z) == pytest.approx((3 * (1 + 2) + 1) * 0.25)


def test_construction_validation():
    with pytest.raises(DomainError):
        MobiusDisk(1.0, PolyExpr(Polynomial.coordinate(0, 1)))
    with pytest.raises(StructureError):
        Sum((PolyExpr(Polynomial.one(1)), PolyExpr(Polynomial.one(2))))
    with pytest.raises(StructureError):
        Embed(PolyExpr(Polynomial.one(2)), 3)
    with pytest.raises(StructureError):
        Project(PolyExpr(Polynomial.one(3)), 2)


# -- tuple evaluation -----------------------------------------------------


def test_poly_node_matches_eval_poly_tuple():
    T = bm.random_commuting_tuple(3, 2, seed=1, spectral_radius=0.7)
    p = bm.random_polynomial(2, 3, seed=2)
    assert np.allclose(bm.eval_expr_tuple(PolyExpr(p), T), bm.eval_poly_tuple(p, T))


def test_mobius_scalar_matrix():
    lam = 0.3 + 0.2j
    c = 0.5
    T = MatrixTuple([lam * np.eye(2), np.zeros((2, 2))])
    e = MobiusDisk(c, PolyExpr(Polynomial.coordinate(0, 2)))
    expected = (c - lam) / (1 - np.conj(c) * lam) * np.eye(2)
    assert np.allclose(bm.eval_expr_tuple(e, T), expected)


def test_expr_spectral_mapping():
    T = bm.random_commuting_tuple(3, 2, seed=3, spectral_radius=0.6)
    p = bm.random_polynomial(2, 2, seed=4)
    scale = 0.4 / max(1.0, abs(p((0.0, 0.0))) + 2)
    e = MobiusDisk(0.3, Sum((PolyExpr(p),), (scale,)))
    m = bm.eval_expr_tuple(e, T)
    lhs = np.linalg.eigvals(m)
    rhs = bm.eval_expr_point(e, bm.joint_spectrum(T).points)
    assert match_multisets(lhs[:, None], np.atleast_1d(rhs)[:, None]) < 1e-8


def test_tuple_eval_equals_point_eval_on_1x1():
    z0 = np.array([0.2 + 0.1j, -0.25])
    T = MatrixTuple([np.array([[z0[0]]]), np.array([[z0[1]]])])
    theta = bm.involution_at(np.array([0.2, -0.1], dtype=complex))
    e = AutoBall(theta, MobiusDisk(0.4, Dilate(PolyExpr(bm.random_polynomial(2, 3, seed=5) * 0.1), 0.9)))
    assert abs(bm.eval_expr_tuple(e, T)[0, 0] - bm.eval_expr_point(e, z0)) < 1e-12


def test_unitary_conjugation_equivariance():
    T = bm.random_commuting_tuple(4, 2, seed=6, spectral_radius=0.6)
    rng = np.random.default_rng(7)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    S = MatrixTuple([q @ a @ q.conj().T for a in T.entries])
    e = MobiusDisk(0.2, Sum((PolyExpr(bm.random_polynomial(2, 2, seed=8)),), (0.1,)))
    lhs = bm.eval_expr_tuple(e, S)
    rhs = q @ bm.eval_expr_tuple(e, T) @ q.conj().T
    assert np.linalg.norm(lhs - rhs) < 1e-10


def test_bare_autoball_is_tuple_action():
    T = bm.random_commuting_tuple(3, 2, seed=9, spectral_radius=0.6)
    theta = bm.involution_at(np.array([0.2, 0.1], dtype=complex))
    image = bm.eval_expr_tuple(AutoBall(theta), T)
    direct = bm.apply_automorphism_tuple(theta, T)
    assert all(np.allclose(a, b) for a, b in zip(image.entries, direct.entries))


# -- derivatives -----------------------------------------------------------


def test_derivative_of_product_monomial():
    e = PolyExpr(Polynomial(2, {(1, 1): 1.0}))
    d0 = bm.partial_derivative(e, 0)
    assert isinstance(d0, PolyExpr)
    assert d0.poly.terms == {(0, 1): 1.0}
    d1 = bm.partial_derivative(PolyExpr(Polynomial(2, {(2, 0): 1.0})), 1)
    assert d1.poly.is_zero()


def finite_difference(e, z, i, h=1e-5):
    step = np.zeros(len(z), dtype=complex)
    step[i] = h
    return (bm.eval_expr_point(e, z + step) - bm.eval_expr_point(e, z - step)) / (2 * h)


def test_derivative_mobius_at_origin():
    c = 0.3 + 0.1j
    e = MobiusDisk(c, PolyExpr(Polynomial.coordinate(0, 2)))
    de = bm.partial_derivative(e, 0)
    at0 = bm.eval_expr_point(de, np.zeros(2))
    assert at0 == pytest.approx(abs(c) ** 2 - 1)
    z = np.array([0.15 - 0.1j, 0.2])
    assert abs(bm.eval_expr_point(de, z) - finite_difference(e, z, 0)) < 1e-6


@pytest.mark.parametrize("node", ["autoball", "dilate", "rational", "product", "embed"])
def test_derivative_finite_difference(node):
    p = bm.random_polynomial(2, 3, seed=11)
    base = PolyExpr(p)
    if node == "autoball":
        theta = bm.involution_at(np.array([0.25, -0.1], dtype=complex))
        e = AutoBall(theta, base)
    elif node == "dilate":
        e = Dilate(base, 0.8)
    elif node == "rational":
        e = RationalExpr(p, Polynomial(2, {(0, 0): 1.0, (0, 1): -0.4}))
    elif node == "product":
        e = Product((base, PolyExpr(bm.random_polynomial(2, 2, seed=12))))
    else:
        e = Project(Embed(base, 1), 2)
    rng = np.random.default_rng(13)
    for _ in range(5):
        z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        z *= 0.5 / np.linalg.norm(z)
        for i in range(2):
            sym = bm.eval_expr_point(bm.partial_derivative(e, i), z)
            fd = finite_difference(e, z, i)
            assert abs(sym - fd) <= 1e-6 * max(1.0, abs(sym))


def test_derivative_vector_valued_rejected():
    theta = bm.involution_at(np.array([0.1, 0.1], dtype=complex))
    with pytest.raises(StructureError):
        bm.partial_derivative(AutoBall(theta), 0)
