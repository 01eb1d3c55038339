import numpy as np
import pytest
import scipy.optimize

import ballmult as bm
from ballmult import (
    DomainError,
    MatrixTuple,
    NumericalError,
    Polynomial,
    PowerSeries,
    PreconditionError,
    StructureError,
)


def match_multisets(a, b):
    """Optimal matching distance between two point multisets."""
    a = np.atleast_2d(np.asarray(a))
    b = np.atleast_2d(np.asarray(b))
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    r, c = scipy.optimize.linear_sum_assignment(cost)
    return float(cost[r, c].max())


# -- validate_tuple -----------------------------------------------------


def test_validate_zero_tuple():
    T = MatrixTuple([np.zeros((2, 2))] * 3)
    diag = bm.validate_tuple(T)
    assert diag.commutation_residual == 0
    assert diag.row_norm == 0
    assert diag.is_row_contraction


def test_validate_jordan_row_norm():
    T = MatrixTuple([np.array([[0, 1], [0, 0]]), np.zeros((2, 2))])
    diag = bm.validate_tuple(T)
    assert diag.commutation_residual == 0
    assert diag.row_norm == pytest.approx(1.0)


def test_validate_random_commuting():
    T = bm.random_commuting_tuple(4, 3, seed=42)
    # independent recomputation of the commutators
    res = 0.0
    for i in range(T.d):
        for j in range(T.d):
            res = max(res, np.linalg.norm(T.entries[i] @ T.entries[j] - T.entries[j] @ T.entries[i]))
    assert res < 1e-12
    assert bm.validate_tuple(T).commutation_residual < 1e-12


def test_structure_errors():
    with pytest.raises(StructureError):
        MatrixTuple([np.zeros((2, 3))])
    with pytest.raises(StructureError):
        MatrixTuple([np.zeros((2, 2)), np.zeros((3, 3))])
    with pytest.raises(StructureError):
        MatrixTuple([])


# -- triangularization ---------------------------------------------------


def test_triangularize_diagonal_tuple():
    T = MatrixTuple([np.diag([0.1, 0.2]), np.diag([0.3, 0.4])])
    tri = bm.simultaneous_triangularize(T)
    assert tri.residual < 1e-14
    assert np.linalg.norm(tri.unitary.conj().T @ tri.unitary - np.eye(2)) < 1e-12


def test_triangularize_already_upper():
    T = MatrixTuple([np.array([[0, 1], [0, 0]]), np.array([[0, 2], [0, 0]])])
    tri = bm.simultaneous_triangularize(T)
    assert tri.residual < 1e-12
    for a in tri.triangular_tuple.entries:
        assert np.linalg.norm(np.tril(a, -1)) < 1e-12


def test_triangularize_random_verifies():
    T = bm.random_commuting_tuple(5, 3, seed=3)
    tri = bm.simultaneous_triangularize(T)
    assert tri.residual < 1e-10
    u = tri.unitary
    assert np.linalg.norm(u.conj().T @ u - np.eye(5)) < 1e-12
    for a, b in zip(T.entries, tri.triangular_tuple.entries):
        assert np.linalg.norm(u @ a @ u.conj().T - b) < 1e-12


def test_triangularize_rejects_noncommuting():
    T = MatrixTuple([np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])])
    with pytest.raises(PreconditionError):
        bm.simultaneous_triangularize(T)


def test_triangularize_jordan_like():
    # polynomials in one non-diagonalizable matrix
    T = bm.random_commuting_tuple(4, 2, seed=9, kind="polynomial-in-one-matrix")
    tri = bm.simultaneous_triangularize(T)
    assert tri.residual < 1e-10


# -- joint spectrum ------------------------------------------------------


def test_spectrum_diagonal():
    T = MatrixTuple([np.diag([0.1, 0.2]), np.diag([0.3, 0.4])])
    pts = bm.joint_spectrum(T).points
    assert match_multisets(pts, [[0.1, 0.3], [0.2, 0.4]]) < 1e-14


def test_spectrum_jordan_multiplicity():
    T = MatrixTuple([np.array([[0, 1], [0, 0]]), np.zeros((2, 2))])
    spec = bm.joint_spectrum(T)
    assert spec.n == 2
    assert match_multisets(spec.points, [[0, 0], [0, 0]]) < 1e-12


def test_spectrum_row_contraction_in_ball():
    T = bm.random_commuting_tuple(4, 3, seed=11)
    spec = bm.joint_spectrum(T)
    assert spec.in_closed_ball(1e-10)


def test_spectral_mapping_polynomial():
    for seed in range(5):
        T = bm.random_commuting_tuple(4, 2, seed=seed, spectral_radius=0.8)
        p = bm.random_polynomial(2, 3, seed=seed + 100)
        pT = bm.eval_poly_tuple(p, T)
        lhs = np.linalg.eigvals(pT)
        rhs = p(bm.joint_spectrum(T).points)
        assert match_multisets(lhs[:, None], rhs[:, None]) < 1e-8


# -- diagonalizability ---------------------------------------------------


def test_diagonalizable_diagonal():
    T = MatrixTuple([np.diag([0.1, 0.5]), np.diag([0.2, 0.6])])
    res = bm.is_jointly_diagonalizable(T)
    assert res.diagonalizable is True
    assert res.offdiag_residual < 1e-12


def test_not_diagonalizable_jordan():
    T = MatrixTuple([np.array([[0, 1], [0, 0]])])
    res = bm.is_jointly_diagonalizable(T)
    assert res.diagonalizable is False


def test_diagonalizable_distinct_eigenvalues():
    T = bm.random_commuting_tuple(4, 3, seed=8)
    res = bm.is_jointly_diagonalizable(T)
    assert res.diagonalizable is True
    s = res.similarity
    s_inv = np.linalg.inv(s)
    for a in T.entries:
        b = s_inv @ a @ s
        assert np.linalg.norm(b - np.diag(np.diag(b))) < 1e-8


# -- polynomial calculus -------------------------------------------------


def test_eval_poly_constant_one():
    T = bm.random_commuting_tuple(3, 2, seed=1)
    assert np.allclose(bm.eval_poly_tuple(Polynomial.one(2), T), np.eye(3))


def test_eval_poly_diagonal_product():
    T = MatrixTuple([np.diag([0.1, 0.2]), np.diag([0.3, 0.4])])
    p = Polynomial(2, {(1, 1): 1.0})
    assert np.allclose(bm.eval_poly_tuple(p, T), np.diag([0.03, 0.08]))


def test_eval_poly_conjugation_invariance():
    T = bm.random_commuting_tuple(4, 2, seed=2)
    p = bm.random_polynomial(2, 3, seed=5)
    tri = bm.simultaneous_triangularize(T)
    u = tri.unitary
    lhs = u @ bm.eval_poly_tuple(p, T) @ u.conj().T
    rhs = bm.eval_poly_tuple(p, tri.triangular_tuple)
    assert np.linalg.norm(lhs - rhs) < 1e-10


def test_eval_poly_variable_mismatch():
    T = bm.random_commuting_tuple(2, 2, seed=1)
    with pytest.raises(StructureError):
        bm.eval_poly_tuple(Polynomial.one(3), T)


# -- series calculus -----------------------------------------------------


def test_series_polynomial_matches_direct():
    T = bm.random_commuting_tuple(3, 2, seed=7, spectral_radius=0.7)
    p = bm.random_polynomial(2, 4, seed=6)
    sv = bm.eval_series_tuple(p, T)
    assert np.linalg.norm(sv.value - bm.eval_poly_tuple(p, T)) < 1e-12
    assert sv.tail_bound == 0.0


def test_series_geometric_nilpotent():
    T = MatrixTuple([np.array([[0, 0.5], [0, 0]]), np.zeros((2, 2))])
    g = PowerSeries.geometric(Polynomial.coordinate(0, 2))
    sv = bm.eval_series_tuple(g, T)
    assert np.allclose(sv.value, np.array([[1, 0.5], [0, 1]]))


def test_series_mobius_vs_rational_oracle():
    T = bm.random_commuting_tuple(3, 2, seed=4, spectral_radius=0.6)
    c = 0.4 - 0.2j
    ser = PowerSeries.mobius_of(c, Polynomial.coordinate(0, 2))
    sv = bm.eval_series_tuple(ser, T, tol=1e-14)
    m = T.entries[0]
    eye = np.eye(3)
    oracle = (c * eye - m) @ np.linalg.inv(eye - np.conj(c) * m)
    assert np.linalg.norm(sv.value - oracle) < 1e-8


def test_series_multiplicativity():
    T = bm.random_commuting_tuple(3, 2, seed=10, spectral_radius=0.6)
    p = bm.random_polynomial(2, 2, seed=11)
    q = bm.random_polynomial(2, 3, seed=12)
    lhs = bm.eval_series_tuple(p * q, T).value
    rhs = bm.eval_series_tuple(p, T).value @ bm.eval_series_tuple(q, T).value
    assert np.linalg.norm(lhs - rhs) < 1e-10


def test_series_domain_and_cap_errors():
    T = MatrixTuple([np.diag([1.2 + 0j]), np.diag([0.0 + 0j])])
    with pytest.raises(DomainError):
        bm.eval_series_tuple(Polynomial.one(2), T)
    T2 = MatrixTuple([np.diag([0.95 + 0j]), np.diag([0j])])
    g = PowerSeries.geometric(Polynomial.coordinate(0, 2))
    with pytest.raises(NumericalError):
        bm.eval_series_tuple(g, T2, tol=1e-14, max_order=12)


# -- Cauchy integral -----------------------------------------------------


def test_cauchy_constant_is_identity():
    T = bm.random_commuting_tuple(2, 2, seed=3, spectral_radius=0.6)
    est = bm.cauchy_integral_eval(lambda z: np.ones(len(z)), T, sample_count=40_000, seed=1)
    dev = np.linalg.norm(est.value - np.eye(2))
    assert dev <= max(3 * est.standard_error, 0.05)


def test_cauchy_monomial_matches_power():
    T = bm.random_commuting_tuple(2, 2, seed=5, spectral_radius=0.5)
    beta = Polynomial(2, {(2, 1): 1.0})
    est = bm.cauchy_integral_eval(beta, T, sample_count=60_000, seed=2)
    exact = bm.eval_poly_tuple(beta, T)
    assert np.linalg.norm(est.value - exact) <= max(3 * est.standard_error, 0.05)


def test_cauchy_polynomial_on_diagonal():
    T = MatrixTuple([np.diag([0.2, -0.3]), np.diag([0.1j, 0.4])])
    p = bm.random_polynomial(2, 2, seed=8)
    est = bm.cauchy_integral_eval(p, T, sample_count=60_000, seed=3)
    exact = bm.eval_poly_tuple(p, T)
    assert np.linalg.norm(est.value - exact) <= 3 * est.standard_error + 1e-3


def test_cauchy_domain_error():
    T = MatrixTuple([np.diag([1.5 + 0j])])
    with pytest.raises(DomainError):
        bm.cauchy_integral_eval(lambda z: np.ones(len(z)), T, sample_count=100)


# -- random tuples -------------------------------------------------------


def test_random_tuple_kinds():
    diag = bm.random_commuting_tuple(2, 2, seed=0, kind="diagonal-conjugated")
    assert bm.validate_tuple(diag).commutation_residual < 1e-12
    assert bm.row_norm(diag) <= 1 + 1e-12

    nil = bm.random_commuting_tuple(3, 2, seed=0, kind="nilpotent-upper")
    for a in nil.entries:
        assert np.linalg.norm(np.tril(a)) == 0  # strictly upper triangular

    poly = bm.random_commuting_tuple(3, 3, seed=0, kind="polynomial-in-one-matrix")
    assert bm.validate_tuple(poly).commutation_residual < 1e-10


def test_random_tuple_determinism():
    a = bm.random_commuting_tuple(3, 2, seed=77)
    b = bm.random_commuting_tuple(3, 2, seed=77)
    assert all(np.array_equal(x, y) for x, y in zip(a.entries, b.entries))


def test_random_tuple_spectral_radius_cap():
    T = bm.random_commuting_tuple(4, 3, seed=5, spectral_radius=0.5)
    assert bm.joint_spectrum(T).max_norm() <= 0.5 + 1e-10


def test_row_norm_unitary_invariance():
    T = bm.random_commuting_tuple(4, 2, seed=6)
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((4, 4)) + 1j)
    S = MatrixTuple([q.conj().T @ a @ q for a in T.entries])
    assert abs(bm.row_norm(T) - bm.row_norm(S)) < 1e-12


def test_diagonalizability_borderline_is_indeterminate():
    # coupling small enough that the eigenbasis conditioning sits in the
    # indeterminate window; reported as None rather than guessed
    T = MatrixTuple([np.array([[0, 1], [0, 1e-10]]), np.zeros((2, 2))])
    res = bm.is_jointly_diagonalizable(T)
    assert res.diagonalizable is None
    assert 1e8 <= res.condition <= 1e12


def test_triangularize_convergence_error_carries_residual():
    # commuting only to 1e-6: accepted at a loose commutation tolerance but
    # impossible to triangularize to 1e-10
    rng = np.random.default_rng(0)
    T0 = bm.random_commuting_tuple(4, 2, seed=1)
    noise = [1e-6 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) for _ in range(2)]
    T = MatrixTuple([a + e for a, e in zip(T0.entries, noise)])
    with pytest.raises(NumericalError) as exc_info:
        bm.simultaneous_triangularize(T, commutation_tol=1e-4)
    assert exc_info.value.residual is not None
    assert exc_info.value.residual > 1e-10
