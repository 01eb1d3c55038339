import numpy as np
import pytest

import ballmult as bm
from ballmult import (
    KernelSpec,
    MatrixTuple,
    PointConfiguration,
    Polynomial,
    PreconditionError,
    StructureError,
)

COUNTEREXAMPLE_POINTS = np.array([[0.8, 0.2], [0.2, 0.8], [0.4, 0.4]], dtype=complex)
COUNTEREXAMPLE_POLY = Polynomial(2, {(2, 0): 1.0, (0, 2): 1.0})


# -- compressed shift -------------------------------------------------------


def test_compressed_shift_d1_k1():
    T = bm.compressed_shift(1, 1)
    assert np.allclose(T.entries[0], np.array([[0, 0], [1, 0]]))


def test_compressed_shift_nilpotent_and_commuting():
    for d, k in ((2, 3), (3, 2)):
        T = bm.compressed_shift(d, k)
        assert T.n == bm.space_dimension(d, k)
        assert bm.commutation_residual(T) <= 1e-14
        for a in T.entries:
            assert np.linalg.norm(np.linalg.matrix_power(a, k + 1)) == 0.0


def test_compressed_shift_row_contraction():
    for d, k in ((1, 4), (2, 4), (3, 3)):
        assert bm.row_norm(bm.compressed_shift(d, k)) <= 1 + 1e-12


# -- sup norm estimate --------------------------------------------------------


def test_sup_estimate_coordinate():
    est = bm.sup_norm_estimate(Polynomial.coordinate(0, 2), budget=1500, seed=0)
    assert 1 - 1e-3 <= est <= 1 + 1e-12


def test_sup_estimate_named_poly():
    est = bm.sup_norm_estimate(COUNTEREXAMPLE_POLY, budget=2000, seed=1)
    assert est == pytest.approx(1.0, abs=1e-6)


def test_sup_estimate_constant():
    est = bm.sup_norm_estimate(Polynomial.constant(0.3 - 0.4j, 3), budget=100, seed=2)
    assert est == pytest.approx(0.5, abs=1e-12)


# -- vn ratio ------------------------------------------------------------------


def test_vn_ratio_d1_compressed_shift():
    T = bm.compressed_shift(1, 4)
    for seed in range(5):
        p = bm.random_polynomial(1, 4, seed=seed)
        r = bm.vn_ratio(p, T, budget=2048, seed=seed)
        assert r.ratio <= 1 + 1e-8


def test_vn_ratio_model_tuple_exceeds_one():
    T = bm.multiplication_tuple(PointConfiguration(COUNTEREXAMPLE_POINTS), KernelSpec(1.0))
    r = bm.vn_ratio(COUNTEREXAMPLE_POLY, T, budget=2048, seed=0)
    assert r.ratio > 1
    assert r.matrix_norm == pytest.approx(1.0588871451133057, abs=1e-9)


def test_vn_ratio_zero_tuple():
    T = MatrixTuple([np.zeros((2, 2))] * 2)
    p = Polynomial(2, {(0, 0): 0.3, (1, 0): 1.0})
    r = bm.vn_ratio(p, T, budget=512, seed=1)
    assert r.matrix_norm == pytest.approx(0.3)
    assert r.ratio == pytest.approx(0.3 / r.sup_estimate)


def test_vn_ratio_errors():
    T = MatrixTuple([np.zeros((2, 2))] * 2)
    with pytest.raises(StructureError):
        bm.vn_ratio(Polynomial.zero(2), T)
    big = MatrixTuple([2.0 * np.eye(2), np.zeros((2, 2))])
    with pytest.raises(PreconditionError):
        bm.vn_ratio(Polynomial.one(2), big)


def test_vn_ratio_spectral_lower_bound():
    for seed in range(5):
        T = bm.random_commuting_tuple(3, 2, seed=seed)
        p = bm.random_polynomial(2, 3, seed=seed + 10)
        r = bm.vn_ratio(p, T, budget=512, seed=seed)
        spec_bound = np.abs(p(bm.joint_spectrum(T).points)).max() / r.sup_estimate
        assert r.ratio >= spec_bound - 1e-10


# -- fuzz campaign --------------------------------------------------------------


def test_fuzz_campaign_reproducible():
    a = bm.vn_fuzz_campaign(2, count=40, seed=9, budget=128)
    b = bm.vn_fuzz_campaign(2, count=40, seed=9, budget=128)
    assert a.summary == b.summary
    assert a.rows == b.rows
    assert a.summary["max_ratio"] <= 1 + 1e-6


def test_fuzz_campaign_threads_value_identical():
    a = bm.vn_fuzz_campaign(2, count=24, seed=3, budget=128, threads=1)
    b = bm.vn_fuzz_campaign(2, count=24, seed=3, budget=128, threads=2)
    assert a.summary["max_ratio"] == pytest.approx(b.summary["max_ratio"], abs=0)


# -- counterexample search --------------------------------------------------------


def test_counterexample_budget_zero_warm_start():
    F = PointConfiguration(COUNTEREXAMPLE_POINTS)
    rep = bm.counterexample_search(3, 2, budget=0, seed=0, warm_start=(COUNTEREXAMPLE_POLY, F))
    assert rep.summary["best_ratio"] > 1
    assert rep.summary["best_poly_terms"] is not None


def test_counterexample_budget_zero_without_warm_start():
    with pytest.raises(StructureError):
        bm.counterexample_search(2, 2, budget=0, seed=0)


def test_counterexample_n2_stays_at_one():
    rep = bm.counterexample_search(2, 2, max_degree=3, budget=60, seed=1)
    assert rep.summary["best_ratio"] <= 1 + 1e-6


def test_counterexample_n3_warm_started_search():
    F = PointConfiguration(COUNTEREXAMPLE_POINTS)
    rep = bm.counterexample_search(3, 2, max_degree=2, budget=30, seed=2, warm_start=(COUNTEREXAMPLE_POLY, F))
    assert rep.summary["best_ratio"] > 1


# -- growth curve -----------------------------------------------------------------


def test_cdn_curve_d2_small():
    rep = bm.cdn_lower_curve(2, 2, trials_per_k=16, budget=1024, seed=4)
    ratios = [r["best_ratio"] for r in rep.rows]
    assert ratios[1] >= ratios[0] - 1e-12
    assert ratios[1] > 1  # the degree-2 extremal already beats the sup norm
    assert rep.rows[0]["N"] == 3 and rep.rows[1]["N"] == 6
    assert "dimension_note" in rep.metadata


def test_cdn_curve_d1_control():
    rep = bm.cdn_lower_curve(1, 3, trials_per_k=8, budget=1024, seed=5)
    assert all(r["best_ratio"] <= 1 + 1e-8 for r in rep.rows)


def test_cdn_curve_reproducible():
    a = bm.cdn_lower_curve(2, 2, trials_per_k=8, budget=512, seed=6)
    b = bm.cdn_lower_curve(2, 2, trials_per_k=8, budget=512, seed=6)
    assert a.summary == b.summary
