"""Gleason splits and the constructive multiplier algorithm.

Two realizations of the split f = sum_i z_i f_i for f(0) = 0:

* the exact monomial rule on polynomials, z^alpha -> (alpha_i/|alpha|)
  z^(alpha - e_i) into component i, and
* a quadrature realization f_i(z) = int_0^1 (d_i f)(t z) dt usable on any
  expression tree (Gauss-Legendre; the two agree on polynomials).

The constructive algorithm walks a commuting tuple by size: triangularize,
move the leading joint eigenvalue to the origin by a Moebius involution,
absorb the value at 0 into a disk involution, split, recurse on the
compressed block, and reassemble through the coordinate row.  Functions are
carried through the recursion as exact ratios of polynomials (composition
with a ball automorphism preserves total degree of the ratio), so the split
at every level is coefficient-exact and the returned expression evaluates
to f(T) up to triangularization residuals.

The multiplier-norm certificate is assembled bottom-up from exact values:
constants contribute their modulus, the coordinate row contributes
max(1, a^{-1/2}), a column of multipliers contributes the root of the sum
of squares, and disk maps of contractive multipliers obey the von Neumann
bound.  When the per-level budgets implied by the configured constant table
fail, the input is rescaled by powers of two until they hold, and the slack
is recorded in the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .automorphisms import (
    BallAutomorphism,
    apply_automorphism_tuple,
    involution_at,
    reduce_variables_span,
    unitary_automorphism,
)
from .errors import (
    ConfigurationError,
    DomainError,
    NumericalError,
    PreconditionError,
    StructureError,
)
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
    as_expr,
    coordinate_expr,
    eval_expr_point,
    eval_expr_tuple,
    partial_derivative,
)
from .polynomials import Polynomial, compose_fractional
from .tuples import (
    MatrixTuple,
    SPECTRAL_MARGIN,
    joint_spectrum,
    simultaneous_triangularize,
)


# ----------------------------------------------------------------------
# Gleason splits
# ----------------------------------------------------------------------


def gleason_split_poly(p: Polynomial) -> list[Polynomial]:
    """Exact split p = sum_i z_i p_i for p(0) = 0: monomial rule
    z^alpha -> (alpha_i/|alpha|) z^(alpha - e_i).

    The coefficient arithmetic is the exact rule; reconstruction recovers
    every coefficient to within one rounding of its magnitude (the weights
    alpha_i/|alpha| are not dyadic, so bit-exactness is not representable)."""
    zero_alpha = (0,) * p.d
    c0 = p.coefficient(zero_alpha)
    if abs(c0) > 1e-12 * max(1.0, p.max_coefficient()):
        raise PreconditionError(f"gleason split requires p(0) = 0, got {c0}")
    comps: list[dict] = [dict() for _ in range(p.d)]
    for alpha, c in p.terms.items():
        total = sum(alpha)
        if total == 0:
            continue
        for i, e in enumerate(alpha):
            if e == 0:
                continue
            beta = list(alpha)
            beta[i] -= 1
            comps[i][tuple(beta)] = c * (e / total)
    return [Polynomial(p.d, t) for t in comps]


_CHECKPOINT_SEED = 314159


def _quadrature_components(h: FunctionExpr, order: int) -> list[FunctionExpr]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    comps = []
    for i in range(h.dim):
        dh = partial_derivative(h, i)
        comps.append(Sum(tuple(Dilate(dh, t) for t in x), tuple(w)))
    return comps


def gleason_split_numeric(
    h: FunctionExpr | Polynomial,
    quadrature_order: int = 32,
    check: bool = True,
    convergence_tol: float = 1e-8,
    max_order: int = 128,
) -> list[FunctionExpr]:
    """Split h = sum_i z_i h_i via h_i(z) = int_0^1 (d_i h)(t z) dt,
    realized by Gauss-Legendre quadrature on expression trees.

    The components evaluate at points and at matrix tuples (the integrand
    is the derivative tree dilated to t z / t T).  The order doubles
    adaptively (up to ``max_order``) until doubling moves sampled values by
    no more than the convergence tolerance; exceeding the cap is a
    convergence error.
    """
    h = as_expr(h)
    if not h.is_scalar:
        raise StructureError("gleason_split_numeric requires a scalar expression")
    h0 = eval_expr_point(h, np.zeros(h.dim, dtype=complex))
    if abs(h0) > 1e-10:
        raise PreconditionError(f"gleason split requires h(0) = 0, got |h(0)| = {abs(h0):.3e}")
    comps = _quadrature_components(h, quadrature_order)
    if not check:
        return comps
    rng = np.random.default_rng(_CHECKPOINT_SEED)
    pts = rng.standard_normal((6, h.dim)) + 1j * rng.standard_normal((6, h.dim))
    pts = 0.5 * pts / np.linalg.norm(pts, axis=1, keepdims=True)
    order = quadrature_order
    worst = np.inf
    while 2 * order <= max_order:
        fine = _quadrature_components(h, 2 * order)
        worst = 0.0
        for a, b in zip(comps, fine):
            va = eval_expr_point(a, pts)
            vb = eval_expr_point(b, pts)
            worst = max(worst, float(np.max(np.abs(va - vb))))
        comps = fine
        order *= 2
        if worst <= convergence_tol:
            return comps
    raise NumericalError(
        f"quadrature not converged by order {max_order}: doubling moved values by {worst:.3e}",
        residual=worst,
    )


def gleason_matrix_identity_residual(
    h: FunctionExpr,
    components: list[FunctionExpr],
    T: MatrixTuple,
) -> float:
    """|| h(T) - sum_i T_i (h_i(T)) ||, the matrix form of the split."""
    total = np.zeros((T.n, T.n), dtype=complex)
    for a, comp in zip(T.entries, components):
        total += a @ eval_expr_tuple(comp, T)
    return float(np.linalg.norm(eval_expr_tuple(h, T) - total, 2))


# ----------------------------------------------------------------------
# Configuration and constants
# ----------------------------------------------------------------------


@dataclass
class SchurConfig:
    a: float = 1.0
    gleason_constant_table: dict | None = None  # None: C(d) = 1 for every d
    quadrature_order: int = 32
    sup_norm_budget: int = 2000
    safety_factor: float = 1.05
    seed: int = 0
    max_restarts: int = 48
    value_cap: float = 0.5  # restart when an intermediate |f(0)| exceeds this

    def __post_init__(self):
        if self.a <= 0 or self.quadrature_order <= 0 or self.sup_norm_budget <= 0:
            raise StructureError("SchurConfig fields must be positive")
        if self.safety_factor < 1.0:
            raise StructureError("safety_factor must be at least 1")
        if self.gleason_constant_table is not None:
            for k, v in self.gleason_constant_table.items():
                if v < 1.0:
                    raise StructureError(f"gleason constant C({k}) = {v} must be >= 1")

    def gleason_constant(self, k: int) -> float:
        if self.gleason_constant_table is None:
            return 1.0
        try:
            return float(self.gleason_constant_table[k])
        except KeyError:
            raise ConfigurationError(f"gleason constant table has no entry for dimension {k}")

    def table_label(self) -> str:
        return "default C(d)=1" if self.gleason_constant_table is None else "user table"


def certified_constant(d: int, n: int, a: float, cfg: SchurConfig | None = None) -> float:
    """(2 min(C(d) sqrt(d), C(n') sqrt(n')) max(1, a^{-1/2}))^(n-1) with
    n' = floor(n^2/4) + 1."""
    if d < 1 or n < 1:
        raise StructureError("d and n must be positive")
    if a <= 0:
        raise StructureError("a must be positive")
    cfg = cfg or SchurConfig(a=a)
    n_prime = n * n // 4 + 1
    base = 2.0 * min(
        cfg.gleason_constant(d) * np.sqrt(d),
        cfg.gleason_constant(n_prime) * np.sqrt(n_prime),
    ) * max(1.0, a ** -0.5)
    return float(base ** (n - 1))


# ----------------------------------------------------------------------
# Rational bookkeeping for the recursion
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Rational:
    num: Polynomial
    den: Polynomial

    @property
    def d(self) -> int:
        return self.num.d

    def value(self, z) -> complex:
        return complex(self.num(z) / self.den(z))

    def value_at_zero(self) -> complex:
        zero = np.zeros(self.d, dtype=complex)
        return self.value(zero)

    def compose_automorphism(self, theta: BallAutomorphism) -> "_Rational":
        m = max(self.num.degree(), self.den.degree(), 0)
        den_poly = theta.denominator_polynomial()
        nums = theta.component_numerators()
        return _Rational(
            compose_fractional(self.num, nums, den_poly, m),
            compose_fractional(self.den, nums, den_poly, m),
        )

    def apply_linear(self, u: np.ndarray) -> "_Rational":
        return _Rational(self.num.apply_linear(u), self.den.apply_linear(u))

    def restrict(self, keep: int) -> "_Rational":
        return _Rational(
            self.num.restrict_trailing_zeros(keep),
            self.den.restrict_trailing_zeros(keep),
        )

    def mobius(self, c: complex) -> "_Rational":
        """(c - f)/(1 - conj(c) f) as a ratio; numerator vanishes at 0 when
        c = f(0), and the stray constant rounding is clamped to exact zero."""
        num = c * self.den - self.num
        den = self.den - np.conj(c) * self.num
        zero_alpha = (0,) * self.d
        c0 = num.coefficient(zero_alpha)
        scale = max(num.max_coefficient(), 1e-300)
        if abs(c0) > 1e-8 * max(scale, 1.0):
            raise NumericalError(
                f"moebius numerator constant term {abs(c0):.3e} did not cancel",
                residual=abs(c0),
            )
        terms = num.terms
        terms.pop(zero_alpha, None)
        return _Rational(Polynomial(self.d, terms), den)

    def scaled_down(self, s: float) -> "_Rational":
        return _Rational(self.num, self.den * s)

    def as_expr(self) -> FunctionExpr:
        one = Polynomial.one(self.d)
        if self.den == one:
            return PolyExpr(self.num)
        return RationalExpr(self.num, self.den)


def rationalize(e: FunctionExpr | Polynomial) -> _Rational:
    """Exact rational normal form of an expression tree (every node of the
    algebra is a rational function)."""
    if isinstance(e, Polynomial):
        return _Rational(e, Polynomial.one(e.d))
    if isinstance(e, PolyExpr):
        return _Rational(e.poly, Polynomial.one(e.dim))
    if isinstance(e, CoordLinear):
        return _Rational(e.as_polynomial(), Polynomial.one(e.dim))
    if isinstance(e, RationalExpr):
        return _Rational(e.num, e.den)
    if isinstance(e, MobiusDisk):
        r = rationalize(e.child)
        return _Rational(e.c * r.den - r.num, r.den - np.conj(e.c) * r.num)
    if isinstance(e, AutoBall):
        if e.child is None:
            raise StructureError("cannot rationalize a vector-valued expression")
        return rationalize(e.child).compose_automorphism(e.auto)
    if isinstance(e, Embed):
        return rationalize(e.child).restrict(e.dim_in)
    if isinstance(e, Project):
        r = rationalize(e.child)
        return _Rational(r.num.pad_variables(e.dim_in), r.den.pad_variables(e.dim_in))
    if isinstance(e, Sum):
        parts = [rationalize(k) for k in e.children]
        dens = [p.den for p in parts]
        if all(q == dens[0] for q in dens):
            num = Polynomial.zero(e.dim)
            for c, p in zip(e.coeffs, parts):
                num = num + c * p.num
            return _Rational(num, dens[0])
        num = Polynomial.zero(e.dim)
        for i, (c, p) in enumerate(zip(e.coeffs, parts)):
            term = c * p.num
            for j, q in enumerate(parts):
                if j != i:
                    term = term * q.den
            num = num + term
        den = Polynomial.one(e.dim)
        for q in parts:
            den = den * q.den
        return _Rational(num, den)
    if isinstance(e, Product):
        num = Polynomial.one(e.dim)
        den = Polynomial.one(e.dim)
        for k in e.children:
            r = rationalize(k)
            num = num * r.num
            den = den * r.den
        return _Rational(num, den)
    if isinstance(e, Dilate):
        r = rationalize(e.child)
        return _Rational(r.num.dilate(e.t), r.den.dilate(e.t))
    raise StructureError(f"unknown node {type(e)!r}")


# ----------------------------------------------------------------------
# The constructive algorithm
# ----------------------------------------------------------------------


class _RestartNeeded(Exception):
    pass


@dataclass(frozen=True)
class SchurLevelRecord:
    level: int                 # matrix size at this recursion level
    path: tuple                # component indices from the root
    base_point: np.ndarray     # involution base (the joint eigenvalue moved to 0)
    c: complex                 # value at the origin absorbed by the disk map
    branch_bound: float        # certified multiplier bound of this branch
    components: tuple = ()     # Gleason components of this level (rational pairs)


@dataclass
class SchurResult:
    g: FunctionExpr
    certified_bound: float
    trace: list
    formula_bound: float
    sup_estimate: float
    scale: float
    slack: float
    table_label: str
    reduction_rank: int | None = None

    def bound_provenance(self) -> dict:
        return {
            "table": self.table_label,
            "sup_estimate": self.sup_estimate,
            "sup_provenance": "empirical-sup",
            "scale": self.scale,
            "slack": self.slack,
            "formula_bound": self.formula_bound,
        }


def _recurse(
    S: MatrixTuple,
    f: _Rational,
    a: float,
    cfg: SchurConfig,
    trace: list,
    path: tuple,
    seed_counter: list,
) -> tuple[FunctionExpr, float]:
    k = S.n
    d = S.d
    if k == 1:
        lam = np.array([m[0, 0] for m in S.entries])
        c = f.value(lam)
        trace.append(SchurLevelRecord(1, path, lam, c, abs(c)))
        return PolyExpr(Polynomial.constant(c, d)), abs(c)

    seed_counter[0] += 1
    try:
        tri = simultaneous_triangularize(S, seed=cfg.seed + seed_counter[0], commutation_tol=1e-7)
        s_tri = tri.triangular_tuple
        lam = np.array([m[0, 0] for m in s_tri.entries])
        if np.linalg.norm(lam) >= 1.0 - 1e-12:
            raise DomainError("joint eigenvalue reached the sphere during the recursion")
        theta = involution_at(lam)
        s_moved = apply_automorphism_tuple(theta, s_tri, check_spectrum=False)
    except NumericalError as exc:
        raise NumericalError(
            f"level {k} (path {path}): {exc}", residual=exc.residual
        ) from exc
    f1 = f.compose_automorphism(theta)
    c = f1.value_at_zero()
    if abs(c) > cfg.value_cap:
        raise _RestartNeeded
    h = f1.mobius(c)
    comps_num = gleason_split_poly(h.num)
    components = tuple(_Rational(nc, h.den) for nc in comps_num)
    block = MatrixTuple([m[1:, 1:] for m in s_moved.entries])
    u_exprs: list[FunctionExpr] = []
    bounds: list[float] = []
    for i, comp in enumerate(components):
        expr_i, b_i = _recurse(block, comp, a, cfg, trace, path + (i,), seed_counter)
        u_exprs.append(expr_i)
        bounds.append(b_i)
    column = float(np.sqrt(sum(b * b for b in bounds)))
    row_factor = max(1.0, a ** -0.5)
    b_u = row_factor * column
    if b_u > 1.0:
        raise _RestartNeeded
    u = Sum(tuple(Product((coordinate_expr(i, d), u_exprs[i])) for i in range(d)))
    g_level = MobiusDisk(c, u)
    g = AutoBall(theta, g_level)
    bound = (abs(c) + b_u) / (1.0 + abs(c) * b_u)
    trace.append(SchurLevelRecord(k, path, lam, c, bound, components))
    return g, bound


def schur_construct(f, T: MatrixTuple, cfg: SchurConfig | None = None) -> SchurResult:
    """Construct g with g(T) = f(T) and a certified multiplier-norm bound
    on the space with kernel (1 - <z,w>)^{-a}.

    Steps: optional variable reduction when d exceeds n' = floor(n^2/4)+1;
    rescale f by the certified-constant budget; recursive construction
    (triangularize, involute the top joint eigenvalue to the origin, disk
    involution at f(0), exact rational Gleason split, recurse on the
    compressed block, reassemble u = sum z_i u_i and undo the disk and ball
    moves); rescale back.  Budget violations double the scale and retry,
    recording the slack.
    """
    cfg = cfg or SchurConfig()
    a = cfg.a
    spectrum = joint_spectrum(T)
    rho = spectrum.max_norm()
    if rho >= 1.0 - SPECTRAL_MARGIN:
        raise DomainError(
            f"joint spectrum must lie strictly inside the ball; max |lambda| = {rho:.6f}"
        )
    d, n = T.d, T.n
    fr = rationalize(f)
    if fr.d != d:
        raise StructureError(f"function has {fr.d} variables, tuple has {d}")

    n_prime = n * n // 4 + 1
    reduction_rank = None
    work_T = T
    outer_wrap = None  # callable FunctionExpr -> FunctionExpr
    if d > n_prime:
        red = reduce_variables_span(T)
        reduction_rank = red.rank
        # entries beyond the span rank vanish by construction, so dropping
        # them is always sound (rank <= n' for commuting input)
        keep = max(1, red.rank)
        u_mat = red.unitary
        fr = fr.apply_linear(u_mat.conj().T).restrict(keep)
        work_T = MatrixTuple(list(red.reduced.entries[:keep]))
        theta_u = unitary_automorphism(u_mat)

        def outer_wrap(expr, _theta=theta_u, _d=d):
            return AutoBall(_theta, Project(expr, _d))

    d_eff = work_T.d

    from .experiments import sup_norm_estimate

    est = sup_norm_estimate(fr.as_expr(), d_eff, budget=cfg.sup_norm_budget, seed=cfg.seed)
    formula = certified_constant(d, n, a, cfg)
    if est <= 0.0:
        zero = PolyExpr(Polynomial.zero(d))
        return SchurResult(
            g=zero, certified_bound=0.0, trace=[], formula_bound=0.0,
            sup_estimate=0.0, scale=1.0, slack=1.0, table_label=cfg.table_label(),
            reduction_rank=reduction_rank,
        )
    s0 = formula * est * cfg.safety_factor
    slack = 1.0
    last_exc: Exception | None = None
    for _ in range(cfg.max_restarts):
        s = s0 * slack
        trace: list = []
        f_scaled = fr.scaled_down(s)
        try:
            g_tilde, b_top = _recurse(work_T, f_scaled, a, cfg, trace, (), [0])
        except _RestartNeeded:
            slack *= 2.0
            continue
        except NumericalError as exc:
            last_exc = exc
            slack *= 2.0
            continue
        wrapped = outer_wrap(g_tilde) if outer_wrap is not None else g_tilde
        g = Sum((wrapped,), (s,))
        return SchurResult(
            g=g,
            certified_bound=float(s * b_top),
            trace=trace,
            formula_bound=float(s0),
            sup_estimate=float(est),
            scale=float(s),
            slack=float(slack),
            table_label=cfg.table_label(),
            reduction_rank=reduction_rank,
        )
    raise NumericalError(
        f"construction failed after {cfg.max_restarts} rescalings"
        + (f" (last: {last_exc})" if last_exc else "")
    )
