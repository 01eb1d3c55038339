import numpy as np
import pytest

from ballmult import Polynomial, StructureError, compose_fractional, monomials_up_to, random_polynomial


def test_constructors_and_queries():
    p = Polynomial(2, {(1, 0): 2.0, (0, 1): 1j})
    assert p.d == 2
    assert p.degree() == 1
    assert p.coefficient((1, 0)) == 2.0
    assert Polynomial.zero(3).degree() == -1
    assert Polynomial.one(2)((0.5, 0.5)) == 1.0
    z1 = Polynomial.coordinate(0, 2)
    assert z1((0.3, 0.9)) == pytest.approx(0.3)


def test_structure_errors():
    with pytest.raises(StructureError):
        Polynomial(0, {})
    with pytest.raises(StructureError):
        Polynomial(2, {(1,): 1.0})
    with pytest.raises(StructureError):
        Polynomial(2, {(-1, 0): 1.0})
    with pytest.raises(StructureError):
        Polynomial.coordinate(2, 2)
    p = Polynomial.one(2)
    with pytest.raises(StructureError):
        p + Polynomial.one(3)


def test_arithmetic_identities():
    rng = np.random.default_rng(0)
    p = random_polynomial(3, 3, seed=1)
    q = random_polynomial(3, 2, seed=2)
    z = 0.5 * (rng.standard_normal((20, 3)) + 1j * rng.standard_normal((20, 3)))
    assert np.allclose((p + q)(z), p(z) + q(z))
    assert np.allclose((p * q)(z), p(z) * q(z), atol=1e-12)
    assert np.allclose((p - q)(z), p(z) - q(z))
    assert np.allclose((2.5j * p)(z), 2.5j * p(z))
    assert np.allclose(p.power(3)(z), p(z) ** 3, atol=1e-10)


def test_batched_vs_single_eval():
    p = random_polynomial(2, 4, seed=3)
    z = np.array([[0.1 + 0.2j, -0.3], [0.0, 0.5j]])
    batch = p(z)
    assert batch.shape == (2,)
    assert batch[0] == pytest.approx(p(z[0]))
    assert batch[1] == pytest.approx(p(z[1]))


def test_partial_derivative():
    p = Polynomial(2, {(2, 1): 3.0})
    dp = p.partial_derivative(0)
    assert dp.terms == {(1, 1): 6.0}
    assert p.partial_derivative(1).terms == {(2, 0): 3.0}
    assert Polynomial(2, {(2, 0): 1.0}).partial_derivative(1).is_zero()


def test_homogeneous_parts_sum_back():
    p = random_polynomial(2, 4, seed=4)
    total = Polynomial.zero(2)
    for m in range(5):
        total = total + p.homogeneous_part(m)
    assert (total - p).max_coefficient() < 1e-15


def test_dilate_pad_restrict_linear():
    p = Polynomial(2, {(1, 1): 1.0, (2, 0): 2.0})
    z = np.array([0.3 + 0.1j, -0.2j])
    assert p.dilate(0.5)(z) == pytest.approx(p(0.5 * z))
    p3 = p.pad_variables(3)
    assert p3((z[0], z[1], 0.9)) == pytest.approx(p(z))
    back = p3.restrict_trailing_zeros(2)
    assert (back - p).max_coefficient() < 1e-15
    u = np.array([[0, 1], [1, 0]], dtype=complex)
    assert p.apply_linear(u)(z) == pytest.approx(p(u @ z))


def test_compose_fractional_is_exact():
    # p(N1/D, N2/D) * D^deg(p) is polynomial; check by evaluation
    p = random_polynomial(2, 3, seed=5)
    n1 = Polynomial(2, {(1, 0): 0.3, (0, 0): 0.1})
    n2 = Polynomial(2, {(0, 1): -0.4, (1, 0): 0.2})
    den = Polynomial(2, {(0, 0): 1.0, (1, 0): -0.35})
    comp = compose_fractional(p, [n1, n2], den)
    rng = np.random.default_rng(6)
    z = 0.4 * (rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2)))
    w = np.stack([n1(z) / den(z), n2(z) / den(z)], axis=1)
    expected = p(w) * den(z) ** max(p.degree(), 0)
    assert np.allclose(comp(z), expected, atol=1e-12)


def test_monomials_up_to_counts():
    from math import comb

    for d in (1, 2, 3):
        for k in (0, 1, 3):
            mons = monomials_up_to(d, k)
            assert len(mons) == comb(d + k, d)
            assert len(set(mons)) == len(mons)
            assert all(sum(a) <= k for a in mons)


def test_random_polynomial_determinism():
    p = random_polynomial(3, 3, seed=42)
    q = random_polynomial(3, 3, seed=42)
    assert p == q
    h = random_polynomial(2, 3, seed=1, homogeneous=True)
    assert all(sum(a) == 3 for a in h.terms)
    nz = random_polynomial(2, 3, seed=1, zero_constant=True)
    assert nz.coefficient((0, 0)) == 0
