"""Multivariate complex polynomials with exact exponent-dict arithmetic.

A polynomial in d variables is stored as a map from exponent multi-indices
(tuples of d nonnegative ints) to complex coefficients.  Degrees stay small
throughout the package (composition with linear fractional maps preserves
total degree), so dict convolution is entirely adequate and keeps the
coefficient arithmetic transparent.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

from .errors import StructureError

_PRUNE_REL = 1e-300  # only drop exact zeros by default


def _clean_terms(d: int, terms: Mapping[tuple, complex], prune: float = _PRUNE_REL) -> dict:
    out: dict[tuple[int, ...], complex] = {}
    if terms:
        scale = max(abs(c) for c in terms.values()) or 1.0
    else:
        scale = 1.0
    for alpha, c in terms.items():
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != d:
            raise StructureError(f"exponent {alpha} has length {len(alpha)}, expected {d}")
        if any(a < 0 for a in alpha):
            raise StructureError(f"negative exponent in {alpha}")
        c = complex(c)
        if c != 0 and abs(c) > prune * scale:
            out[alpha] = out.get(alpha, 0j) + c
    return {a: c for a, c in out.items() if c != 0}


class Polynomial:
    """Polynomial in ``d`` complex variables, term map alpha -> coefficient."""

    __slots__ = ("d", "_terms", "_arrays")

    def __init__(self, d: int, terms: Mapping[tuple, complex] | None = None):
        if d < 1:
            raise StructureError("polynomial needs at least one variable")
        self.d = int(d)
        self._terms = _clean_terms(self.d, terms or {})
        self._arrays = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, d: int) -> "Polynomial":
        return cls(d, {})

    @classmethod
    def constant(cls, c: complex, d: int) -> "Polynomial":
        return cls(d, {(0,) * d: complex(c)})

    @classmethod
    def one(cls, d: int) -> "Polynomial":
        return cls.constant(1.0, d)

    @classmethod
    def coordinate(cls, i: int, d: int) -> "Polynomial":
        if not 0 <= i < d:
            raise StructureError(f"coordinate index {i} out of range for d={d}")
        alpha = [0] * d
        alpha[i] = 1
        return cls(d, {tuple(alpha): 1.0})

    @classmethod
    def linear(cls, coeffs: Iterable[complex]) -> "Polynomial":
        """sum_i coeffs[i] * z_i."""
        coeffs = list(coeffs)
        d = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            alpha = [0] * d
            alpha[i] = 1
            terms[tuple(alpha)] = c
        return cls(d, terms)

    # -- basic queries ------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(a) for a in self._terms)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self._terms.values())

    def coefficient(self, alpha: tuple) -> complex:
        return self._terms.get(tuple(alpha), 0j)

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def __repr__(self):
        items = sorted(self._terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        body = " + ".join(f"({c:.4g})*z^{a}" for a, c in items[:8])
        more = " + ..." if len(items) > 8 else ""
        return f"Polynomial(d={self.d}, {body or '0'}{more})"

    def __eq__(self, other):
        return (
            isinstance(other, Polynomial)
            and self.d == other.d
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.d, frozenset(self._terms.items())))

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for a, c in other._terms.items():
            terms[a] = terms.get(a, 0j) + c
        return Polynomial(self.d, terms)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Polynomial(self.d, {a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial(self.d, {a: c * other for a, c in self._terms.items()})
        other = self._coerce(other)
        terms: dict[tuple[int, ...], complex] = {}
        for a1, c1 in self._terms.items():
            for a2, c2 in other._terms.items():
                key = tuple(x + y for x, y in zip(a1, a2))
                terms[key] = terms.get(key, 0j) + c1 * c2
        p = Polynomial(self.d, terms)
        return p._pruned()

    def __rmul__(self, other):
        return self.__mul__(other)

    def _pruned(self, rel: float = 1e-15) -> "Polynomial":
        scale = self.max_coefficient()
        if scale == 0:
            return self
        terms = {a: c for a, c in self._terms.items() if abs(c) > rel * scale * 1e-2}
        q = Polynomial.__new__(Polynomial)
        q.d = self.d
        q._terms = terms
        q._arrays = None
        return q

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.d != self.d:
                raise StructureError(f"variable count mismatch: {self.d} vs {other.d}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(other, self.d)
        raise StructureError(f"cannot combine Polynomial with {type(other)!r}")

    def power(self, k: int) -> "Polynomial":
        if k < 0:
            raise StructureError("negative power")
        out = Polynomial.one(self.d)
        base = self
        while k:
            if k & 1:
                out = out * base
            base_needed = k >> 1
            if base_needed:
                base = base * base
            k >>= 1
        return out

    # -- evaluation ---------------------------------------------------

    def _eval_arrays(self):
        if self._arrays is None:
            expo = np.array(list(self._terms.keys()), dtype=np.int64)  # (t, d)
            coef = np.array(list(self._terms.values()), dtype=complex)  # (t,)
            self._arrays = (expo, coef)
        return self._arrays

    def __call__(self, z) -> complex | np.ndarray:
        """Evaluate at a point of shape (d,) or a batch of shape (N, d)."""
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        if single:
            z = z[None, :]
        if z.shape[-1] != self.d:
            raise StructureError(f"point dimension {z.shape[-1]} != d={self.d}")
        if not self._terms:
            vals = np.zeros(z.shape[0], dtype=complex)
        else:
            expo, coef = self._eval_arrays()
            # z[:, None, :] ** expo[None, :, :] with 0**0 == 1
            mono = np.prod(z[:, None, :] ** expo[None, :, :], axis=-1)
            vals = mono @ coef
        return vals[0] if single else vals

    # -- calculus and structure ----------------------------------------

    def partial_derivative(self, i: int) -> "Polynomial":
        if not 0 <= i < self.d:
            raise StructureError(f"derivative index {i} out of range for d={self.d}")
        terms = {}
        for a, c in self._terms.items():
            if a[i] == 0:
                continue
            b = list(a)
            b[i] -= 1
            terms[tuple(b)] = terms.get(tuple(b), 0j) + c * a[i]
        return Polynomial(self.d, terms)

    def homogeneous_part(self, m: int) -> "Polynomial":
        return Polynomial(self.d, {a: c for a, c in self._terms.items() if sum(a) == m})

    def dilate(self, t: complex) -> "Polynomial":
        """z -> t*z, i.e. coefficients scaled by t**|alpha|."""
        return Polynomial(self.d, {a: c * t ** sum(a) for a, c in self._terms.items()})

    def pad_variables(self, new_d: int) -> "Polynomial":
        """View as a polynomial in new_d >= d variables (trailing vars unused)."""
        if new_d < self.d:
            raise StructureError("pad_variables cannot shrink the variable count")
        pad = (0,) * (new_d - self.d)
        return Polynomial(new_d, {a + pad: c for a, c in self._terms.items()})

    def restrict_trailing_zeros(self, keep: int) -> "Polynomial":
        """Substitute z_j = 0 for j >= keep and drop those variables."""
        if not 1 <= keep <= self.d:
            raise StructureError("keep out of range")
        terms = {}
        for a, c in self._terms.items():
            if any(a[j] != 0 for j in range(keep, self.d)):
                continue
            terms[a[:keep]] = terms.get(a[:keep], 0j) + c
        return Polynomial(keep, terms)

    def apply_linear(self, U: np.ndarray) -> "Polynomial":
        """Precompose with the linear map z -> U z: returns p(U z)."""
        U = np.asarray(U, dtype=complex)
        if U.shape != (self.d, self.d):
            raise StructureError("linear map shape mismatch")
        numerators = [Polynomial.linear(U[i, :]) for i in range(self.d)]
        return compose_fractional(self, numerators, Polynomial.one(self.d))


def compose_fractional(
    p: Polynomial,
    numerators: list[Polynomial],
    denominator: Polynomial,
    target_degree: int | None = None,
) -> Polynomial:
    """Return the polynomial p(N_1/D, ..., N_d/D) * D**m, with m = target degree.

    All N_i and D share the same variable count (the new variables), which
    may differ from p.d.  m defaults to deg(p); the caller is responsible
    for consistent m when forming ratios of composed numerator/denominator.
    """
    if len(numerators) != p.d:
        raise StructureError("numerator count must equal p.d")
    new_d = denominator.d
    for q in numerators:
        if q.d != new_d:
            raise StructureError("all substitution components need the same variable count")
    m = p.degree() if target_degree is None else int(target_degree)
    if m < 0:
        m = 0
    if p.degree() > m:
        raise StructureError("target_degree smaller than deg(p)")
    # cache powers of each numerator and of the denominator
    max_per_var = [0] * p.d
    for a in p.terms:
        for i, e in enumerate(a):
            max_per_var[i] = max(max_per_var[i], e)
    num_pows: list[list[Polynomial]] = []
    for i, q in enumerate(numerators):
        pw = [Polynomial.one(new_d)]
        for _ in range(max_per_var[i]):
            pw.append(pw[-1] * q)
        num_pows.append(pw)
    den_pows = [Polynomial.one(new_d)]
    for _ in range(m):
        den_pows.append(den_pows[-1] * denominator)

    out = Polynomial.zero(new_d)
    for a, c in p.terms.items():
        term = Polynomial.constant(c, new_d)
        for i, e in enumerate(a):
            if e:
                term = term * num_pows[i][e]
        term = term * den_pows[m - sum(a)]
        out = out + term
    return out._pruned()


def _compositions(total: int, slots: int):
    if slots == 1:
        yield (total,)
        return
    for e in range(total, -1, -1):
        for rest in _compositions(total - e, slots - 1):
            yield (e,) + rest


def monomials_up_to(d: int, k: int) -> list[tuple[int, ...]]:
    """All exponent multi-indices in d variables of total degree <= k,
    graded order (degree first, lexicographically descending within a degree)."""
    out: list[tuple[int, ...]] = []
    for deg in range(k + 1):
        out.extend(_compositions(deg, d))
    return out


def random_polynomial(
    d: int,
    degree: int,
    seed,
    homogeneous: bool = False,
    zero_constant: bool = False,
) -> Polynomial:
    """Random complex-Gaussian coefficients on all monomials of degree <= degree
    (or exactly == degree if homogeneous)."""
    rng = np.random.default_rng(seed)
    terms = {}
    for alpha in monomials_up_to(d, degree):
        s = sum(alpha)
        if homogeneous and s != degree:
            continue
        if zero_constant and s == 0:
            continue
        c = rng.standard_normal() + 1j * rng.standard_normal()
        terms[alpha] = c / (1.0 + s)
    p = Polynomial(d, terms)
    if p.is_zero():
        p = Polynomial.coordinate(0, d)
    return p
