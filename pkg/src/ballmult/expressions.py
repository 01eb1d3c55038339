"""Composition trees for every function the multiplier machinery manipulates.

A FunctionExpr is an immutable tree built from polynomials, scalar disk
Moebius maps, ball-automorphism precompositions, coordinate embeddings and
projections, sums, products, dilations z -> t z, and leaf ratios of
polynomials.  Trees evaluate at points of the ball and, through the
holomorphic functional calculus, at commuting matrix tuples whose joint
spectrum lies inside the ball; both evaluations share the same recursive
structure, with matrix inverses replacing scalar division.

Symbolic partial derivatives stay inside the algebra: the derivative of a
disk Moebius map is a quadratic expression in the map itself, and the
derivative of an automorphism precomposition is a chain-rule sum against
polynomial ratios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automorphisms import (
    BallAutomorphism,
    apply_automorphism_point,
    apply_automorphism_tuple,
)
from .errors import DomainError, NumericalError, StructureError
from .polynomials import Polynomial
from .tuples import MatrixTuple, _PowerCache, eval_poly_tuple

_RCOND_MIN = 1e-12


class FunctionExpr:
    """Base class; nodes define dim (input dimension) and is_scalar."""

    dim: int
    is_scalar = True

    def node_name(self) -> str:
        return type(self).__name__

    # convenience operator sugar used throughout tests and experiments
    def __add__(self, other):
        return Sum((self, as_expr(other, self.dim)))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return Sum((self,), (complex(other),))
        return Product((self, as_expr(other, self.dim)))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __sub__(self, other):
        return Sum((self, as_expr(other, self.dim)), (1.0, -1.0))


def as_expr(obj, dim: int | None = None) -> FunctionExpr:
    if isinstance(obj, FunctionExpr):
        return obj
    if isinstance(obj, Polynomial):
        return PolyExpr(obj)
    if isinstance(obj, (int, float, complex, np.number)):
        if dim is None:
            raise StructureError("dimension required to promote a scalar constant")
        return PolyExpr(Polynomial.constant(obj, dim))
    raise StructureError(f"cannot interpret {type(obj)!r} as a FunctionExpr")


def constant_expr(c: complex, d: int) -> "PolyExpr":
    return PolyExpr(Polynomial.constant(c, d))


def coordinate_expr(i: int, d: int) -> "PolyExpr":
    return PolyExpr(Polynomial.coordinate(i, d))


@dataclass(frozen=True)
class PolyExpr(FunctionExpr):
    poly: Polynomial

    @property
    def dim(self) -> int:
        return self.poly.d


@dataclass(frozen=True)
class CoordLinear(FunctionExpr):
    """Row pairing z . u = sum_i u_i z_i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if not self.coeffs:
            raise StructureError("CoordLinear needs at least one coefficient")

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def as_polynomial(self) -> Polynomial:
        return Polynomial.linear(self.coeffs)


@dataclass(frozen=True)
class RationalExpr(FunctionExpr):
    """Leaf ratio num/den of polynomials; den must not vanish on the ball."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.num.d != self.den.d:
            raise StructureError("numerator/denominator variable counts differ")
        if self.den.is_zero():
            raise StructureError("denominator polynomial is zero")

    @property
    def dim(self) -> int:
        return self.num.d


@dataclass(frozen=True)
class MobiusDisk(FunctionExpr):
    """w -> (c - w)/(1 - conj(c) w) applied to a scalar child; |c| < 1.

    This choice (the involution swapping c and 0) makes the map its own
    inverse, so psi^{-1} = psi throughout the constructive algorithm.
    """

    c: complex
    child: FunctionExpr

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if abs(self.c) >= 1:
            raise DomainError("MobiusDisk parameter must satisfy |c| < 1")
        if not self.child.is_scalar:
            raise StructureError("MobiusDisk child must be scalar-valued")

    @property
    def dim(self) -> int:
        return self.child.dim


@dataclass(frozen=True)
class AutoBall(FunctionExpr):
    """Precomposition with a ball automorphism: z -> child(theta(z)).

    With child None the node is the vector-valued map theta itself.
    """

    auto: BallAutomorphism
    child: FunctionExpr | None = None

    def __post_init__(self):
        if self.child is not None:
            if not self.child.is_scalar:
                raise StructureError("AutoBall child must be scalar-valued")
            if self.child.dim != self.auto.d:
                raise StructureError(
                    f"child expects dimension {self.child.dim}, automorphism acts on {self.auto.d}"
                )

    @property
    def dim(self) -> int:
        return self.auto.d

    @property
    def is_scalar(self) -> bool:
        return self.child is not None


@dataclass(frozen=True)
class Embed(FunctionExpr):
    """z in B_k -> child((z, 0, ..., 0)); pads to the child's dimension."""

    child: FunctionExpr
    dim_in: int

    def __post_init__(self):
        if not self.child.is_scalar:
            raise StructureError("Embed child must be scalar-valued")
        if not 1 <= self.dim_in <= self.child.dim:
            raise StructureError("Embed input dimension must be between 1 and child dimension")

    @property
    def dim(self) -> int:
        return self.dim_in


@dataclass(frozen=True)
class Project(FunctionExpr):
    """z in B_d -> child(z_1, ..., z_k): drop trailing coordinates."""

    child: FunctionExpr
    dim_in: int

    def __post_init__(self):
        if not self.child.is_scalar:
            raise StructureError("Project child must be scalar-valued")
        if self.dim_in < self.child.dim:
            raise StructureError("Project input dimension must be at least child dimension")

    @property
    def dim(self) -> int:
        return self.dim_in


@dataclass(frozen=True)
class Sum(FunctionExpr):
    children: tuple
    coeffs: tuple | None = None

    def __post_init__(self):
        kids = tuple(self.children)
        if not kids:
            raise StructureError("Sum needs at least one child")
        coeffs = self.coeffs
        if coeffs is None:
            coeffs = (1.0,) * len(kids)
        coeffs = tuple(complex(c) for c in coeffs)
        if len(coeffs) != len(kids):
            raise StructureError("Sum coefficient count must match children")
        d = kids[0].dim
        for k in kids:
            if not k.is_scalar:
                raise StructureError("Sum children must be scalar-valued")
            if k.dim != d:
                raise StructureError("Sum children must share the input dimension")
        # flatten nested sums at construction so memoized evaluations of the
        # children stay shared
        flat_kids: list[FunctionExpr] = []
        flat_coeffs: list[complex] = []
        for k, c in zip(kids, coeffs):
            if isinstance(k, Sum):
                for kk, cc in zip(k.children, k.coeffs):
                    flat_kids.append(kk)
                    flat_coeffs.append(c * cc)
            else:
                flat_kids.append(k)
                flat_coeffs.append(c)
        object.__setattr__(self, "children", tuple(flat_kids))
        object.__setattr__(self, "coeffs", tuple(flat_coeffs))

    @property
    def dim(self) -> int:
        return self.children[0].dim


@dataclass(frozen=True)
class Product(FunctionExpr):
    children: tuple

    def __post_init__(self):
        kids = tuple(self.children)
        if not kids:
            raise StructureError("Product needs at least one child")
        d = kids[0].dim
        for k in kids:
            if not k.is_scalar:
                raise StructureError("Product children must be scalar-valued")
            if k.dim != d:
                raise StructureError("Product children must share the input dimension")
        object.__setattr__(self, "children", kids)

    @property
    def dim(self) -> int:
        return self.children[0].dim


@dataclass(frozen=True)
class Dilate(FunctionExpr):
    """z -> child(t z) for |t| <= 1."""

    child: FunctionExpr
    t: complex

    def __post_init__(self):
        object.__setattr__(self, "t", complex(self.t))
        if abs(self.t) > 1 + 1e-12:
            raise DomainError("dilation factor must satisfy |t| <= 1")
        if not self.child.is_scalar:
            raise StructureError("Dilate child must be scalar-valued")

    @property
    def dim(self) -> int:
        return self.child.dim


# ----------------------------------------------------------------------
# Evaluation at points
# ----------------------------------------------------------------------


def eval_expr_point(e: FunctionExpr, z):
    """Evaluate at a single point (d,) or a batch (N, d) inside the ball.

    Scalar nodes return a complex scalar (or (N,) array); a bare AutoBall
    returns the image point(s).
    """
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    zz = z[None, :] if single else z
    if zz.shape[-1] != e.dim:
        raise StructureError(f"point dimension {zz.shape[-1]} != expression dimension {e.dim}")
    vals = _eval_point(e, zz)
    if single:
        return vals[0]
    return vals


def _eval_point(e: FunctionExpr, z: np.ndarray):
    if isinstance(e, PolyExpr):
        return e.poly(z)
    if isinstance(e, CoordLinear):
        return z @ np.asarray(e.coeffs)
    if isinstance(e, RationalExpr):
        den = e.den(z)
        if np.any(np.abs(den) < 1e-300):
            raise DomainError("RationalExpr denominator vanished at an evaluation point")
        return e.num(z) / den
    if isinstance(e, MobiusDisk):
        w = _eval_point(e.child, z)
        if np.any(np.abs(w) >= 1.0):
            raise DomainError(
                f"MobiusDisk child value left the open disk (max |w| = {np.max(np.abs(w)):.6f})"
            )
        return (e.c - w) / (1.0 - np.conj(e.c) * w)
    if isinstance(e, AutoBall):
        imgs = apply_automorphism_point(e.auto, z)
        if e.child is None:
            return imgs
        return _eval_point(e.child, imgs)
    if isinstance(e, Embed):
        pad = np.zeros((z.shape[0], e.child.dim - e.dim_in), dtype=complex)
        return _eval_point(e.child, np.hstack([z, pad]))
    if isinstance(e, Project):
        return _eval_point(e.child, z[:, : e.child.dim])
    if isinstance(e, Sum):
        out = np.zeros(z.shape[0], dtype=complex)
        for c, k in zip(e.coeffs, e.children):
            out = out + c * _eval_point(k, z)
        return out
    if isinstance(e, Product):
        out = np.ones(z.shape[0], dtype=complex)
        for k in e.children:
            out = out * _eval_point(k, z)
        return out
    if isinstance(e, Dilate):
        return _eval_point(e.child, e.t * z)
    raise StructureError(f"unknown node {type(e)!r}")


# ----------------------------------------------------------------------
# Evaluation at matrix tuples
# ----------------------------------------------------------------------


def eval_expr_tuple(e: FunctionExpr, T: MatrixTuple):
    """Evaluate through the holomorphic functional calculus.

    Poly nodes use the polynomial calculus; MobiusDisk(c) maps a matrix M
    to (cI - M)(I - conj(c) M)^{-1}; AutoBall nodes evaluate the rational
    matrix formula of the automorphism and recurse on the image tuple.
    A bare AutoBall returns the image MatrixTuple.
    """
    if T.d != e.dim:
        raise StructureError(f"tuple dimension {T.d} != expression dimension {e.dim}")
    return _eval_tuple(e, T, _PowerCache(T))


def _matrix_inverse(m: np.ndarray, where: str) -> np.ndarray:
    rcond = 1.0 / max(np.linalg.cond(m), 1.0)
    if not np.isfinite(rcond) or rcond < _RCOND_MIN:
        raise NumericalError(
            f"{where}: matrix inverse badly conditioned (rcond {rcond:.2e})",
            residual=float(rcond),
        )
    return np.linalg.inv(m)


def _eval_tuple(e: FunctionExpr, T: MatrixTuple, cache: _PowerCache):
    if isinstance(e, PolyExpr):
        return eval_poly_tuple(e.poly, T, cache)
    if isinstance(e, CoordLinear):
        return sum(c * a for c, a in zip(e.coeffs, T.entries))
    if isinstance(e, RationalExpr):
        num = eval_poly_tuple(e.num, T, cache)
        den = eval_poly_tuple(e.den, T, cache)
        return num @ _matrix_inverse(den, "RationalExpr")
    if isinstance(e, MobiusDisk):
        m = _eval_tuple(e.child, T, cache)
        radius = float(np.max(np.abs(np.linalg.eigvals(m))))
        if radius >= 1.0:
            raise DomainError(
                f"MobiusDisk child spectrum left the open disk (radius {radius:.6f})"
            )
        eye = np.eye(T.n, dtype=complex)
        return (e.c * eye - m) @ _matrix_inverse(eye - np.conj(e.c) * m, "MobiusDisk")
    if isinstance(e, AutoBall):
        image = apply_automorphism_tuple(e.auto, T)
        if e.child is None:
            return image
        return _eval_tuple(e.child, image, _PowerCache(image))
    if isinstance(e, Embed):
        zero = np.zeros((T.n, T.n), dtype=complex)
        padded = MatrixTuple(list(T.entries) + [zero] * (e.child.dim - e.dim_in))
        return _eval_tuple(e.child, padded, _PowerCache(padded))
    if isinstance(e, Project):
        shortened = MatrixTuple(list(T.entries[: e.child.dim]))
        return _eval_tuple(e.child, shortened, _PowerCache(shortened))
    if isinstance(e, Sum):
        out = np.zeros((T.n, T.n), dtype=complex)
        for c, k in zip(e.coeffs, e.children):
            out = out + c * _eval_tuple(k, T, cache)
        return out
    if isinstance(e, Product):
        out = np.eye(T.n, dtype=complex)
        for k in e.children:
            out = out @ _eval_tuple(k, T, cache)
        return out
    if isinstance(e, Dilate):
        scaled = T.scaled(e.t)
        return _eval_tuple(e.child, scaled, _PowerCache(scaled))
    raise StructureError(f"unknown node {type(e)!r}")


# ----------------------------------------------------------------------
# Symbolic partial derivatives
# ----------------------------------------------------------------------


def partial_derivative(e: FunctionExpr, i: int) -> FunctionExpr:
    """Symbolic d/dz_i as a new tree; exact for polynomial leaves, chain
    rule at compositions.  Vector-valued input is a structural error."""
    if not e.is_scalar:
        raise StructureError("partial_derivative requires a scalar-valued expression")
    if not 0 <= i < e.dim:
        raise StructureError(f"derivative index {i} out of range for dimension {e.dim}")
    return _derive(e, i)


def _derive(e: FunctionExpr, i: int) -> FunctionExpr:
    if isinstance(e, PolyExpr):
        return PolyExpr(e.poly.partial_derivative(i))
    if isinstance(e, CoordLinear):
        return constant_expr(e.coeffs[i], e.dim)
    if isinstance(e, RationalExpr):
        num = e.num.partial_derivative(i) * e.den - e.num * e.den.partial_derivative(i)
        return RationalExpr(num, e.den * e.den)
    if isinstance(e, MobiusDisk):
        # psi'(w) = (|c|^2 - 1)/(1 - conj(c) w)^2 = (conj(c) psi(w) - 1)^2/(|c|^2 - 1)
        q = Sum((e, constant_expr(1.0, e.dim)), (np.conj(e.c), -1.0))
        scale = 1.0 / (abs(e.c) ** 2 - 1.0)
        return Sum((Product((q, q, _derive(e.child, i))),), (scale,))
    if isinstance(e, AutoBall):
        den = e.auto.denominator_polynomial()
        nums = e.auto.component_numerators()
        dden = den.partial_derivative(i)  # = -conj(b_i)
        den_sq = den * den
        parts = []
        for j in range(e.dim):
            dnum_ij = nums[j].partial_derivative(i) * den - nums[j] * dden
            parts.append(
                Product((AutoBall(e.auto, _derive(e.child, j)), RationalExpr(dnum_ij, den_sq)))
            )
        return Sum(tuple(parts))
    if isinstance(e, Embed):
        return Embed(_derive(e.child, i), e.dim_in)
    if isinstance(e, Project):
        if i >= e.child.dim:
            return constant_expr(0.0, e.dim)
        return Project(_derive(e.child, i), e.dim_in)
    if isinstance(e, Sum):
        return Sum(tuple(_derive(k, i) for k in e.children), e.coeffs)
    if isinstance(e, Product):
        parts = []
        for j in range(len(e.children)):
            factors = list(e.children)
            factors[j] = _derive(e.children[j], i)
            parts.append(Product(tuple(factors)))
        return Sum(tuple(parts))
    if isinstance(e, Dilate):
        return Sum((Dilate(_derive(e.child, i), e.t),), (e.t,))
    raise StructureError(f"unknown node {type(e)!r}")
