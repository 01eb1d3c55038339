"""Kernels (1 - <z,w>)^{-a}, Pick matrices, restriction multiplier norms.

The restriction multiplier norm of values (v_1, ..., v_m) at points
F = {z_1, ..., z_m} is the least c >= 0 making the Pick matrix

    [ (c^2 - v_i conj(v_j)) k(z_i, z_j) ]

positive semidefinite.  In closed form c is the largest singular value of
K^{-1/2} D K^{1/2} with K the kernel Gram matrix and D = diag(values); a
bisection over Cholesky-certified PSD tests serves as an independent oracle
and as the fallback for ill-conditioned Gram matrices.

The module also hosts the coordinate-row criterion c^2 <= (a+n)/(n+1) with
its exact case split, the model multiplication tuple on the restricted
space (which turns point configurations into commuting matrix tuples), and
a seeded multistart search maximizing the restriction norm over n-point
configurations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .errors import ConditioningWarning, DomainError, PropertyViolation, StructureError
from .expressions import FunctionExpr, eval_expr_point
from .polynomials import Polynomial
from .tuples import MatrixTuple

SEPARATION_TOL = 1e-8
PSD_TRACE_TOL = 1e-10
ILL_CONDITION_RATIO = 1e-13
BISECTION_ITERS = 60


@dataclass(frozen=True)
class KernelSpec:
    """Kernel parameter a > 0 of (1 - <z,w>)^{-a}; a = 1 is the
    Drury-Arveson kernel."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise StructureError("kernel parameter a must be positive")

    @property
    def is_drury_arveson(self) -> bool:
        return abs(self.a - 1.0) < 1e-15


@dataclass(frozen=True)
class PointConfiguration:
    """Finite set of distinct points strictly inside the unit ball."""

    points: np.ndarray  # (m, d)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise StructureError("points must form a nonempty (m, d) array")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms >= 1.0):
            raise DomainError(f"configuration points must lie strictly inside the ball (max norm {norms.max():.6f})")
        m = pts.shape[0]
        for i in range(m):
            for j in range(i + 1, m):
                if np.linalg.norm(pts[i] - pts[j]) <= SEPARATION_TOL:
                    raise StructureError(
                        f"points {i} and {j} are closer than the separation tolerance"
                    )
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def merge_close_points(points: np.ndarray, tol: float = SEPARATION_TOL) -> np.ndarray:
    """Drop points within tol of an earlier one (search helper)."""
    kept: list[np.ndarray] = []
    for p in np.asarray(points, dtype=complex):
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return np.array(kept)


@dataclass(frozen=True)
class PickCertificate:
    c: float
    pick_matrix: np.ndarray
    min_eigenvalue: float
    feasible: bool


def kernel_matrix(F: PointConfiguration, spec: KernelSpec) -> np.ndarray:
    """K_ij = (1 - <z_i, z_j>)^{-a}; Hermitian positive definite.

    <z_i, z_j> always has modulus < 1, so 1 - <z_i,z_j> stays away from the
    branch cut of the principal power.  Near-singular K triggers a
    ConditioningWarning.
    """
    pts = F.points
    gram = pts @ pts.conj().T  # <z_i, z_j>
    # |<z_i,z_j>| < 1 keeps 1 - t in the right half plane, away from the
    # branch cut of the principal power
    assert np.all(np.abs(gram) < 1.0)
    base = 1.0 - gram
    K = np.exp(-spec.a * np.log(base))
    K = 0.5 * (K + K.conj().T)
    w = np.linalg.eigvalsh(K)
    if w[0] < ILL_CONDITION_RATIO * max(w[-1], 1.0):
        warnings.warn(
            f"kernel matrix nearly singular (min eig {w[0]:.3e}, max {w[-1]:.3e})",
            ConditioningWarning,
            stacklevel=2,
        )
    return K


def pick_certificate(values, F: PointConfiguration, spec: KernelSpec, c: float) -> PickCertificate:
    """Pick matrix (c^2 - v_i conj(v_j)) K_ij with its PSD verdict."""
    v = np.asarray(values, dtype=complex).reshape(-1)
    if v.shape[0] != F.m:
        raise StructureError("value count must match the number of points")
    K = kernel_matrix(F, spec)
    P = (c**2 - np.outer(v, np.conj(v))) * K
    P = 0.5 * (P + P.conj().T)
    w = np.linalg.eigvalsh(P)
    tol = PSD_TRACE_TOL * max(1.0, abs(float(np.trace(P).real)))
    return PickCertificate(
        c=float(c),
        pick_matrix=P,
        min_eigenvalue=float(w[0]),
        feasible=bool(w[0] >= -tol),
    )


def _psd_by_cholesky(M: np.ndarray, shift: float) -> bool:
    try:
        np.linalg.cholesky(M + shift * np.eye(M.shape[0]))
        return True
    except np.linalg.LinAlgError:
        return False


def restriction_norm_bisection(
    values,
    F: PointConfiguration,
    spec: KernelSpec,
    iters: int = BISECTION_ITERS,
    K: np.ndarray | None = None,
) -> float:
    """Independent oracle: bisect on c with a Cholesky PSD certificate of
    c^2 K - D K D*."""
    v = np.asarray(values, dtype=complex).reshape(-1)
    if v.shape[0] != F.m:
        raise StructureError("value count must match the number of points")
    if K is None:
        K = kernel_matrix(F, spec)
    dkd = np.outer(v, np.conj(v)) * K
    dkd = 0.5 * (dkd + dkd.conj().T)
    w = np.linalg.eigvalsh(K)
    lo = float(np.max(np.abs(v)))
    hi = lo * float(np.sqrt(max(w[-1], 1e-300) / max(w[0], 1e-300))) + 1e-9
    shift = 1e-12 * max(1.0, float(np.trace(K).real)) * max(1.0, lo**2)

    def feasible(c: float) -> bool:
        return _psd_by_cholesky(c**2 * K - dkd, shift)

    if feasible(lo):
        return lo
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _restriction_norm_closed_form(v: np.ndarray, K: np.ndarray) -> float:
    w, V = np.linalg.eigh(K)
    w = np.maximum(w, 1e-300)
    k_half = (V * np.sqrt(w)) @ V.conj().T
    k_inv_half = (V / np.sqrt(w)) @ V.conj().T
    A = k_inv_half @ np.diag(v) @ k_half
    return float(np.linalg.norm(A, 2))


def restriction_multiplier_norm(values, F: PointConfiguration, spec: KernelSpec) -> float:
    """Least c >= 0 with (c^2 K - D K D*) PSD: the multiplier norm of the
    restriction to F of any function taking these values.

    Closed form: largest singular value of K^{-1/2} D K^{1/2}.  When K is
    nearly singular the bisection oracle takes over (with a warning).
    """
    value, _method = restriction_norm_details(values, F, spec)
    return value


def restriction_norm_details(values, F: PointConfiguration, spec: KernelSpec) -> tuple[float, str]:
    v = np.asarray(values, dtype=complex).reshape(-1)
    if v.shape[0] != F.m:
        raise StructureError("value count must match the number of points")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        K = kernel_matrix(F, spec)
    w = np.linalg.eigvalsh(K)
    if w[0] < ILL_CONDITION_RATIO * max(w[-1], 1.0):
        warnings.warn(
            "kernel matrix nearly singular; using the bisection certificate",
            ConditioningWarning,
            stacklevel=2,
        )
        return restriction_norm_bisection(v, F, spec, K=K), "bisection"
    return _restriction_norm_closed_form(v, K), "closed-form"


def multiplication_tuple(F: PointConfiguration, spec: KernelSpec) -> MatrixTuple:
    """The model tuple M_z on the restricted space: T_i = K^{-1/2} D_i K^{1/2}
    with D_i = diag of the i-th coordinates.  Jointly diagonalizable with
    spectrum F, and ||p(T)|| equals the restriction multiplier norm of p|_F."""
    K = kernel_matrix(F, spec)
    w, V = np.linalg.eigh(K)
    w = np.maximum(w, 1e-300)
    k_half = (V * np.sqrt(w)) @ V.conj().T
    k_inv_half = (V / np.sqrt(w)) @ V.conj().T
    pts = F.points
    return MatrixTuple([k_inv_half @ np.diag(pts[:, i]) @ k_half for i in range(F.d)])


# ----------------------------------------------------------------------
# Coordinate row multiplier norm (exact)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RowCondition:
    feasible: bool
    first_failing: int | None


def coordinate_row_condition(c: float, spec: KernelSpec, n_max: int = 10_000) -> RowCondition:
    """Whether c * [z_1 ... z_d] is a contractive multiplier: the
    coefficient condition c^2 <= (a+n)/(n+1) for all n >= 0.

    Exact case split: for a <= 1 the ratio increases in n, so n = 0 decides
    (c^2 <= a); for a >= 1 it tends to 1 from above, so the condition is
    c^2 <= 1.  The n_max scan only cross-checks the closed form.
    """
    if c < 0:
        raise StructureError("c must be nonnegative")
    if n_max < 1:
        raise StructureError("n_max must be at least 1")
    a = spec.a
    c2 = c * c
    feasible = c2 <= min(1.0, a)
    first_failing: int | None = None
    if not feasible:
        if c2 <= 1.0:
            first_failing = 0  # only possible when a < c2 <= 1
        else:
            # (a+n)/(n+1) < c2  <=>  n > (a - c2)/(c2 - 1)
            first_failing = max(0, int(np.floor((a - c2) / (c2 - 1.0))) + 1)
    # guard scan
    for n in range(0, n_max + 1):
        if c2 > (a + n) / (n + 1):
            if feasible:
                raise PropertyViolation(
                    f"coefficient scan contradicts the closed-form case split at n={n}"
                )
            break
    return RowCondition(feasible=feasible, first_failing=first_failing)


def coordinate_row_norm(spec: KernelSpec) -> float:
    """Multiplier norm of the coordinate row [z_1 ... z_d]: max(1, a^{-1/2}),
    independent of d.  Consistency-checked against the feasibility flip of
    coordinate_row_condition at the reciprocal level."""
    result = max(1.0, spec.a ** -0.5)
    eps = 1e-9
    below = coordinate_row_condition(1.0 / (result + eps), spec).feasible
    above = coordinate_row_condition(1.0 / (result - eps), spec).feasible
    if not below or above:
        raise PropertyViolation("coordinate row norm inconsistent with the feasibility flip")
    return result


# ----------------------------------------------------------------------
# n-point norm search
# ----------------------------------------------------------------------


@dataclass
class SearchResult:
    config: PointConfiguration
    value: float
    evaluations: int
    trace: list = field(default_factory=list)  # (iteration, best value, config id)


def _config_objective(e: FunctionExpr, spec: KernelSpec, flat: np.ndarray, m: int, d: int) -> tuple[float, np.ndarray]:
    pts = flat.reshape(m, 2 * d)
    z = pts[:, :d] + 1j * pts[:, d:]
    # project inside the ball
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    scale = np.where(norms >= 1.0 - 1e-6, (1.0 - 1e-6) / np.maximum(norms, 1e-300), 1.0)
    z = z * scale
    merged = merge_close_points(z)
    try:
        F = PointConfiguration(merged)
        vals = eval_expr_point(e, merged)
        vals = np.atleast_1d(vals)
        return restriction_multiplier_norm(vals, F, spec), merged
    except (DomainError, StructureError):
        return 0.0, merged


def npoint_norm_search(
    e: FunctionExpr | Polynomial,
    n: int,
    spec: KernelSpec,
    budget: int = 2000,
    seed: int = 0,
    warm_starts: list[PointConfiguration] | None = None,
    starts: int = 32,
    radius: float = 0.95,
) -> SearchResult:
    """Multistart local search maximizing the restriction multiplier norm
    over configurations of at most n points: a certified LOWER bound on the
    n-point multiplier norm.

    Random starts are uniform in a ball of the given radius; each start is
    polished by Nelder-Mead over the 2*d*n real coordinates with projection
    back inside the ball.  Budget counts objective evaluations.
    """
    if isinstance(e, Polynomial):
        from .expressions import PolyExpr

        e = PolyExpr(e)
    if n < 1:
        raise StructureError("n must be at least 1")
    warm_starts = list(warm_starts or [])
    if budget <= 0 and not warm_starts:
        raise StructureError("budget 0 requires at least one warm start")
    d = e.dim
    rng = np.random.default_rng(seed)
    counter = {"used": 0}
    best = {"value": -np.inf, "points": None}
    trace: list[tuple[int, float, int]] = []

    def objective(flat: np.ndarray, config_id: int) -> float:
        counter["used"] += 1
        val, merged = _config_objective(e, spec, flat, n, d)
        if val > best["value"]:
            best["value"] = val
            best["points"] = merged
            trace.append((counter["used"], val, config_id))
        return -val

    def flatten(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if z.shape[0] < n:  # repeat-pad slightly jittered to reach n points
            extra = z[rng.integers(0, z.shape[0], n - z.shape[0])]
            extra = extra + 1e-3 * (rng.standard_normal(extra.shape) + 1j * rng.standard_normal(extra.shape))
            z = np.vstack([z, extra])
        return np.hstack([z.real, z.imag]).reshape(-1)

    initials: list[np.ndarray] = []
    for cfg in warm_starts:
        if cfg.d != d:
            raise StructureError("warm start dimension mismatch")
        # evaluate the warm start as-is first, so inherited bests are kept
        vals = np.atleast_1d(eval_expr_point(e, cfg.points))
        counter["used"] += 1
        v = restriction_multiplier_norm(vals, cfg, spec)
        if v > best["value"]:
            best["value"] = v
            best["points"] = np.asarray(cfg.points)
            trace.append((counter["used"], v, len(initials)))
        initials.append(flatten(cfg.points))
    total_starts = max(len(initials), min(starts, max(1, budget // 20)))
    while len(initials) < total_starts:
        g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = radius * rng.uniform(0, 1, size=(n, 1)) ** (1.0 / (2 * d))
        initials.append(flatten(g * r))

    for config_id, x0 in enumerate(initials):
        remaining = budget - counter["used"]
        if remaining <= 2:
            break
        per = max(8, min(remaining, budget // max(1, len(initials))))
        scipy.optimize.minimize(
            objective,
            x0,
            args=(config_id,),
            method="Nelder-Mead",
            options={"maxfev": per, "xatol": 1e-9, "fatol": 1e-11},
        )
    if best["points"] is None or len(best["points"]) == 0:
        raise StructureError("search found no admissible configuration")
    return SearchResult(
        config=PointConfiguration(best["points"]),
        value=float(best["value"]),
        evaluations=counter["used"],
        trace=trace,
    )
