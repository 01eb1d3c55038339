"""Commuting matrix tuples: validation, joint spectrum, functional calculus.

The central object is a d-tuple T = (T_1, ..., T_d) of commuting n x n
complex matrices.  Everything downstream (Pick norms, automorphism actions,
the constructive multiplier algorithm) consumes these tuples, so this module
carries the numerically careful parts: simultaneous unitary triangularization
with a deflation fallback, the triangularization-based joint spectrum, a
diagonalizability test, and three routes for evaluating functions of a tuple
(polynomial calculus, homogeneous power series, Monte-Carlo Cauchy integral).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError, PreconditionError, StructureError
from .polynomials import Polynomial

# Default tolerances; every operation takes explicit keyword overrides.
COMMUTATION_TOL = 1e-10
TRIANGULARIZATION_TOL = 1e-10
UNITARY_TOL = 1e-12
SPECTRAL_MARGIN = 1e-9
DIAG_COND_THRESHOLD = 1e8
DIAG_COND_HOPELESS = 1e12


class MatrixTuple:
    """d commuting n x n complex matrices.

    Construction checks structure only (squareness, uniform size); the
    commutation property is checked by :func:`validate_tuple`, and operations
    that rely on it re-validate at their own tolerance.
    """

    __slots__ = ("entries", "d", "n")

    def __init__(self, entries: Sequence[np.ndarray]):
        mats = []
        for k, a in enumerate(entries):
            a = np.array(a, dtype=complex)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise StructureError(f"entry {k} is not a square matrix: shape {a.shape}")
            a.setflags(write=False)
            mats.append(a)
        if not mats:
            raise StructureError("a tuple needs at least one matrix")
        n = mats[0].shape[0]
        if any(m.shape[0] != n for m in mats):
            raise StructureError("all entries must share the same size")
        self.entries = tuple(mats)
        self.d = len(mats)
        self.n = n

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __repr__(self):
        return f"MatrixTuple(d={self.d}, n={self.n})"

    def stack(self) -> np.ndarray:
        """(d, n, n) array of the entries."""
        return np.stack(self.entries)

    def scaled(self, t: complex) -> "MatrixTuple":
        return MatrixTuple([t * a for a in self.entries])

    def conjugated(self, s: np.ndarray, s_inv: np.ndarray | None = None) -> "MatrixTuple":
        """Similarity s^{-1} T_i s applied entrywise."""
        s = np.asarray(s, dtype=complex)
        if s_inv is None:
            s_inv = np.linalg.inv(s)
        return MatrixTuple([s_inv @ a @ s for a in self.entries])


@dataclass(frozen=True)
class TupleDiagnostics:
    commutation_residual: float
    row_norm: float
    is_row_contraction: bool
    n: int
    d: int


@dataclass(frozen=True)
class SpectrumPointSet:
    """Joint spectrum: n points of C^d with multiplicity, ordered consistently
    with the triangularizing basis that produced them."""

    points: np.ndarray  # (n, d) complex

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if pts.ndim != 2:
            raise StructureError("spectrum points must be an (n, d) array")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def max_norm(self) -> float:
        if self.points.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def in_closed_ball(self, tol: float = 1e-8) -> bool:
        return self.max_norm() <= 1.0 + tol


@dataclass(frozen=True)
class TriangularizationResult:
    unitary: np.ndarray            # U with U T_i U* upper triangular
    triangular_tuple: MatrixTuple  # the conjugated entries
    residual: float                # max Frobenius norm of strict lower parts
    coefficients: np.ndarray       # random combination that fixed the ordering


@dataclass(frozen=True)
class DiagonalizabilityResult:
    diagonalizable: bool | None    # None means indeterminate
    similarity: np.ndarray | None  # S with S^{-1} T_i S diagonal when True
    condition: float
    offdiag_residual: float

    def __bool__(self):
        return bool(self.diagonalizable)


def row_norm(T: MatrixTuple) -> float:
    """Largest singular value of the block row [T_1 ... T_d]."""
    block = np.hstack(T.entries)
    return float(np.linalg.norm(block, 2))


def commutation_residual(T: MatrixTuple) -> float:
    res = 0.0
    for i in range(T.d):
        for j in range(i + 1, T.d):
            c = T.entries[i] @ T.entries[j] - T.entries[j] @ T.entries[i]
            res = max(res, float(np.linalg.norm(c)))
    return res


def validate_tuple(T: MatrixTuple, tol: float = COMMUTATION_TOL) -> TupleDiagnostics:
    """Diagnostics record: commutator residual, row norm, contraction flag."""
    res = commutation_residual(T)
    rn = row_norm(T)
    return TupleDiagnostics(
        commutation_residual=res,
        row_norm=rn,
        is_row_contraction=bool(rn <= 1.0 + tol),
        n=T.n,
        d=T.d,
    )


def _require_commuting(T: MatrixTuple, tol: float) -> None:
    scale = max(1.0, max(float(np.linalg.norm(a)) for a in T.entries))
    res = commutation_residual(T)
    if res > tol * scale:
        raise PreconditionError(
            f"tuple is not commuting within tolerance: residual {res:.3e} > {tol:.1e}"
        )


def _strict_lower_residual(entries: Sequence[np.ndarray]) -> float:
    res = 0.0
    for a in entries:
        res = max(res, float(np.linalg.norm(np.tril(a, -1))))
    return res


def _unit_coefficients(rng: np.random.Generator, d: int) -> np.ndarray:
    c = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return c / np.linalg.norm(c)


def _common_eigenvector(mats: list[np.ndarray], rng: np.random.Generator, tol: float) -> np.ndarray:
    """Common eigenvector of exactly-commuting matrices, by restriction to
    eigenspaces of a random combination until the space is one-dimensional."""
    n = mats[0].shape[0]
    basis = np.eye(n, dtype=complex)  # columns: onb of the current subspace
    work = [m.copy() for m in mats]
    while basis.shape[1] > 1:
        k = basis.shape[1]
        c = _unit_coefficients(rng, len(work))
        m = sum(ci * wi for ci, wi in zip(c, work))
        evals, evecs = np.linalg.eig(m)
        lam = evals[0]
        # numerical eigenspace of lam via SVD nullspace of (m - lam I)
        u, s, vh = np.linalg.svd(m - lam * np.eye(k))
        cut = max(tol * max(s[0], 1.0), 1e-14)
        null_dim = int(np.sum(s <= cut))
        if null_dim == 0:
            null_dim = 1
        vecs = vh[k - null_dim:].conj().T  # (k, null_dim), orthonormal
        basis = basis @ vecs
        if null_dim == k:
            # combination acts as a scalar here; drop it and try the rest
            work = [vecs.conj().T @ w @ vecs for w in work]
            # perturb: if all matrices are scalar on this space, any vector works
            if all(np.linalg.norm(w - w[0, 0] * np.eye(null_dim)) <= tol * 10 for w in work):
                return basis[:, 0]
        else:
            work = [vecs.conj().T @ w @ vecs for w in work]
    return basis[:, 0]


def _triangularize_deflation(T: MatrixTuple, rng: np.random.Generator, tol: float) -> np.ndarray:
    """Classical deflation: find a common eigenvector, rotate it to e_1,
    recurse on the lower block.  Returns the accumulated unitary U."""
    n = T.n
    mats = [a.copy() for a in T.entries]
    U = np.eye(n, dtype=complex)
    for k in range(n - 1):
        size = n - k
        sub = [m[k:, k:] for m in mats]
        v = _common_eigenvector(sub, rng, tol)
        # Householder-like unitary sending v to e_1
        q, _ = np.linalg.qr(np.column_stack([v, np.eye(size, dtype=complex)]))
        # ensure first column is v up to phase; fix phase so q[:,0] == v
        phase = np.vdot(q[:, 0], v)
        if abs(phase) > 0:
            q[:, 0] *= phase / abs(phase)
        w = np.eye(n, dtype=complex)
        w[k:, k:] = q
        mats = [w.conj().T @ m @ w for m in mats]
        U = w.conj().T @ U
    return U


def simultaneous_triangularize(
    T: MatrixTuple,
    tol: float = TRIANGULARIZATION_TOL,
    commutation_tol: float = COMMUTATION_TOL,
    seed: int = 0,
    max_retries: int = 5,
) -> TriangularizationResult:
    """Joint unitary upper-triangularization of a commuting tuple.

    A random complex combination of the entries is Schur-decomposed and its
    unitary applied to every entry; generic coefficients separate the joint
    eigenvalues, so this succeeds in one shot for almost every input.  On
    failure the combination is redrawn (up to ``max_retries``), then a
    deflation pass over common eigenvectors is used as a fallback.
    The diagonal ordering follows the Schur ordering of the combination.
    """
    _require_commuting(T, commutation_tol)
    rng = np.random.default_rng(seed)
    scale = max(1.0, max(float(np.linalg.norm(a)) for a in T.entries))
    best: tuple[float, np.ndarray, list[np.ndarray], np.ndarray] | None = None
    for _ in range(max_retries):
        c = _unit_coefficients(rng, T.d)
        m = sum(ci * a for ci, a in zip(c, T.entries))
        _, z = scipy.linalg.schur(m, output="complex")
        u = z.conj().T
        tri = [u @ a @ z for a in T.entries]
        res = _strict_lower_residual(tri)
        if best is None or res < best[0]:
            best = (res, u, tri, c)
        if res <= tol * scale:
            break
    assert best is not None
    res, u, tri, c = best
    if res > tol * scale:
        u2 = _triangularize_deflation(T, rng, tol)
        tri2 = [u2 @ a @ u2.conj().T for a in T.entries]
        res2 = _strict_lower_residual(tri2)
        if res2 < res:
            res, u, tri, c = res2, u2, tri2, c
    if res > tol * scale:
        raise NumericalError(
            f"joint triangularization did not converge: residual {res:.3e}",
            residual=res,
        )
    unitarity = float(np.linalg.norm(u.conj().T @ u - np.eye(T.n)))
    if unitarity > UNITARY_TOL * max(1.0, T.n):
        raise NumericalError(
            f"triangularizing basis lost unitarity: {unitarity:.3e}", residual=unitarity
        )
    # zero nothing: keep the honest conjugated entries
    return TriangularizationResult(
        unitary=u,
        triangular_tuple=MatrixTuple(tri),
        residual=res,
        coefficients=c,
    )


def joint_spectrum(T: MatrixTuple, **kwargs) -> SpectrumPointSet:
    """Joint diagonal entries of a simultaneous triangularization: the i-th
    point collects the i-th diagonal entry of every triangularized T_j."""
    if T.n == 1:
        return SpectrumPointSet(np.array([[a[0, 0] for a in T.entries]]))
    tri = simultaneous_triangularize(T, **kwargs)
    pts = np.stack([np.diag(a) for a in tri.triangular_tuple.entries], axis=1)
    return SpectrumPointSet(pts)


def is_jointly_diagonalizable(
    T: MatrixTuple,
    tol: float = 1e-8,
    commutation_tol: float = COMMUTATION_TOL,
    seed: int = 0,
    attempts: int = 5,
) -> DiagonalizabilityResult:
    """Test for a common eigenbasis within tolerance.

    Eigendecompose random combinations of the entries; a combination of a
    jointly diagonalizable tuple is almost surely diagonalizable with the
    same eigenbasis.  Decision: condition of the best eigenvector matrix
    below 1e8 and small off-diagonal residual -> True; condition above 1e12
    -> False; the window in between is reported indeterminate rather than
    guessed.
    """
    _require_commuting(T, commutation_tol)
    n = T.n
    if n == 1:
        return DiagonalizabilityResult(True, np.eye(1, dtype=complex), 1.0, 0.0)
    rng = np.random.default_rng(seed)
    scale = max(1.0, max(float(np.linalg.norm(a)) for a in T.entries))
    best: tuple[float, float, np.ndarray] | None = None  # (residual, cond, S)
    for _ in range(attempts):
        c = _unit_coefficients(rng, T.d)
        m = sum(ci * a for ci, a in zip(c, T.entries))
        _, s = np.linalg.eig(m)
        cond = float(np.linalg.cond(s))
        if not np.isfinite(cond):
            cond = np.inf
        if cond == np.inf:
            res = np.inf
        else:
            s_inv = np.linalg.inv(s)
            res = 0.0
            for a in T.entries:
                b = s_inv @ a @ s
                res = max(res, float(np.linalg.norm(b - np.diag(np.diag(b)))))
            res /= scale
        if best is None or (cond, res) < (best[1], best[0]):
            best = (res, cond, s)
        if cond < DIAG_COND_THRESHOLD and res <= tol:
            return DiagonalizabilityResult(True, s, cond, res)
    res, cond, s = best
    if cond < DIAG_COND_THRESHOLD and res <= tol:
        return DiagonalizabilityResult(True, s, cond, res)
    if cond >= DIAG_COND_HOPELESS:
        return DiagonalizabilityResult(False, None, cond, res)
    return DiagonalizabilityResult(None, None, cond, res)


# ----------------------------------------------------------------------
# Functional calculus
# ----------------------------------------------------------------------


class _PowerCache:
    """Per-tuple cache of entry powers, so repeated monomial evaluation of
    the same tuple costs one matmul per new power."""

    def __init__(self, T: MatrixTuple):
        self.T = T
        self._pows: dict[tuple[int, int], np.ndarray] = {}
        self.eye = np.eye(T.n, dtype=complex)

    def power(self, i: int, k: int) -> np.ndarray:
        if k == 0:
            return self.eye
        key = (i, k)
        got = self._pows.get(key)
        if got is None:
            got = self.power(i, k - 1) @ self.T.entries[i]
            self._pows[key] = got
        return got

    def monomial(self, alpha: Sequence[int]) -> np.ndarray:
        out = None
        for i, e in enumerate(alpha):
            if e == 0:
                continue
            p = self.power(i, e)
            out = p if out is None else out @ p
        return self.eye if out is None else out


def eval_poly_tuple(p: Polynomial, T: MatrixTuple, cache: _PowerCache | None = None) -> np.ndarray:
    """p(T) by the polynomial functional calculus."""
    if p.d != T.d:
        raise StructureError(f"polynomial has {p.d} variables, tuple has {T.d}")
    cache = cache or _PowerCache(T)
    out = np.zeros((T.n, T.n), dtype=complex)
    for alpha, c in p.terms.items():
        out += c * cache.monomial(alpha)
    return out


class PowerSeries:
    """Supplier of the homogeneous expansion f = sum_m f_m of a holomorphic
    function, each f_m a homogeneous polynomial of degree m."""

    def __init__(
        self,
        d: int,
        part_fn: Callable[[int], Polynomial],
        max_degree: int | None = None,
        label: str = "series",
    ):
        self.d = d
        self._part_fn = part_fn
        self.max_degree = max_degree
        self.label = label

    def homogeneous_part(self, m: int) -> Polynomial:
        if self.max_degree is not None and m > self.max_degree:
            return Polynomial.zero(self.d)
        return self._part_fn(m)

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "PowerSeries":
        return cls(p.d, p.homogeneous_part, max_degree=max(p.degree(), 0), label="poly")

    @classmethod
    def scalar_composed(
        cls,
        coeff_fn: Callable[[int], complex],
        inner: Polynomial,
        label: str = "composed",
    ) -> "PowerSeries":
        """Series sum_k a_k * inner(z)**k with inner(0) = 0, reorganized into
        homogeneous parts.  Requires a vanishing constant term so each
        homogeneous degree receives finitely many contributions."""
        if abs(inner.coefficient((0,) * inner.d)) > 1e-14 * max(1.0, inner.max_coefficient()):
            raise PreconditionError("scalar_composed requires inner(0) = 0")
        pows: list[Polynomial] = [Polynomial.one(inner.d)]

        def part(m: int) -> Polynomial:
            while len(pows) <= m:
                pows.append(pows[-1] * inner)
            out = Polynomial.zero(inner.d)
            for k in range(m + 1):
                a = coeff_fn(k)
                if a != 0:
                    out = out + a * pows[k].homogeneous_part(m)
            return out

        return cls(inner.d, part, max_degree=None, label=label)

    @classmethod
    def mobius_of(cls, c: complex, inner: Polynomial) -> "PowerSeries":
        """(c - w)/(1 - conj(c) w) expanded around w = 0 and composed with inner."""
        if abs(c) >= 1:
            raise DomainError("Moebius parameter must satisfy |c| < 1")
        cbar = np.conj(c)

        def coeff(k: int) -> complex:
            if k == 0:
                return c
            return -(1 - abs(c) ** 2) * cbar ** (k - 1)

        return cls.scalar_composed(coeff, inner, label="mobius")

    @classmethod
    def geometric(cls, inner: Polynomial) -> "PowerSeries":
        """1/(1 - w) composed with inner, inner(0) = 0."""
        return cls.scalar_composed(lambda k: 1.0, inner, label="geometric")


@dataclass(frozen=True)
class SeriesValue:
    value: np.ndarray
    order: int
    tail_bound: float


def _spectral_radius_proxy(T: MatrixTuple, **kwargs) -> float:
    return joint_spectrum(T, **kwargs).max_norm()


def eval_series_tuple(
    f: PowerSeries | Polynomial,
    T: MatrixTuple,
    tol: float = 1e-12,
    max_order: int = 256,
    margin: float = SPECTRAL_MARGIN,
) -> SeriesValue:
    """sum_{m <= N} f_m(T), truncated at the first order whose homogeneous
    term norm falls below tol; the reported tail bound is the geometric
    extrapolation from the last term using the measured spectral radius."""
    if isinstance(f, Polynomial):
        f = PowerSeries.from_polynomial(f)
    if f.d != T.d:
        raise StructureError("series and tuple variable counts differ")
    rho = _spectral_radius_proxy(T)
    if rho >= 1.0 - margin:
        raise DomainError(f"joint spectrum must lie strictly inside the ball; max |lambda| = {rho:.6f}")
    cache = _PowerCache(T)
    total = np.zeros((T.n, T.n), dtype=complex)
    ratio = rho / max(1.0 - rho, 1e-15)
    last = np.inf
    hard_cap = f.max_degree if f.max_degree is not None else max_order
    order_used = 0
    small_streak = 0
    for m in range(min(hard_cap, max_order) + 1):
        part = f.homogeneous_part(m)
        if part.is_zero():
            last = 0.0
        else:
            term = eval_poly_tuple(part, T, cache)
            total = total + term
            last = float(np.linalg.norm(term, 2))
        order_used = m
        # sparse series skip degrees, so require a few consecutive small
        # terms before declaring convergence
        small_streak = small_streak + 1 if last <= tol else 0
        if f.max_degree is None and m >= 1 and small_streak >= 4:
            return SeriesValue(total, m, last * ratio)
    if f.max_degree is not None and order_used >= f.max_degree:
        return SeriesValue(total, order_used, 0.0)
    tail = last * ratio
    if small_streak == 0:
        raise NumericalError(
            f"series truncation cap {max_order} reached before tolerance; tail estimate {tail:.3e}",
            residual=tail,
        )
    return SeriesValue(total, order_used, tail)


@dataclass(frozen=True)
class CauchyEstimate:
    value: np.ndarray
    standard_error: float
    sample_count: int


def _as_point_function(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, Polynomial):
        return f
    if callable(f):
        return f
    raise StructureError("expected a Polynomial or a callable boundary function")


def cauchy_integral_eval(
    f,
    T: MatrixTuple,
    sample_count: int = 200_000,
    seed: int = 0,
    margin: float = SPECTRAL_MARGIN,
) -> CauchyEstimate:
    """Monte-Carlo estimate of the ball Cauchy integral

        int_{dB_d} f(zeta) (I - <T, zeta>)^{-d} dsigma(zeta),

    with <T, zeta> = sum_i conj(zeta_i) T_i and dsigma the uniform surface
    measure, sampled via normalized complex Gaussians.  Returns the estimate
    and a Frobenius-aggregated standard-error proxy."""
    rho = _spectral_radius_proxy(T)
    if rho >= 1.0 - margin:
        raise DomainError(f"joint spectrum must lie strictly inside the ball; max |lambda| = {rho:.6f}")
    fn = _as_point_function(f)
    rng = np.random.default_rng(seed)
    n, d = T.n, T.d
    eye = np.eye(n, dtype=complex)
    stack = T.stack()  # (d, n, n)
    total = np.zeros((n, n), dtype=complex)
    total_sq = np.zeros((n, n), dtype=float)
    done = 0
    chunk = min(sample_count, 20_000)
    while done < sample_count:
        m = min(chunk, sample_count - done)
        g = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
        zeta = g / np.linalg.norm(g, axis=1, keepdims=True)
        w = np.einsum("md,dij->mij", np.conj(zeta), stack)
        resolvent = np.linalg.inv(eye[None, :, :] - w)
        power = resolvent
        for _ in range(d - 1):
            power = power @ resolvent
        vals = np.asarray(fn(zeta), dtype=complex).reshape(m, 1, 1)
        samples = vals * power
        total += samples.sum(axis=0)
        total_sq += (np.abs(samples) ** 2).sum(axis=0)
        done += m
    mean = total / sample_count
    var = total_sq / sample_count - np.abs(mean) ** 2
    var = np.maximum(var, 0.0)
    se = float(np.sqrt(var.sum() / sample_count))
    return CauchyEstimate(mean, se, sample_count)


# ----------------------------------------------------------------------
# Random commuting tuples
# ----------------------------------------------------------------------


def _random_ball_points(rng: np.random.Generator, n: int, d: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.uniform(0, 1, size=(n, 1)) ** (1.0 / (2 * d))
    return g * r


def random_commuting_tuple(
    n: int,
    d: int,
    seed,
    kind: str = "diagonal-conjugated",
    row_norm_target: float = 1.0,
    spectral_radius: float | None = None,
) -> MatrixTuple:
    """Seeded generator of exactly-commuting tuples, scaled to row norm <= target.

    kinds:
      diagonal-conjugated   S diag(lambda_i) S^{-1} with a mildly non-normal S;
                            realizes the diagonalizable tuples of the n-point picture.
      polynomial-in-one-matrix   T_i = p_i(A) for one random A.
      nilpotent-upper       polynomials without constant term in one strictly
                            upper triangular matrix: strictly upper, nilpotent.
    """
    if n < 1 or d < 1:
        raise StructureError("n and d must be positive")
    rng = np.random.default_rng(seed)
    radius = spectral_radius if spectral_radius is not None else 0.9
    if kind == "diagonal-conjugated":
        pts = _random_ball_points(rng, n, d, radius)
        while True:
            s = np.eye(n, dtype=complex) + 0.2 * (
                rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            ) / np.sqrt(n)
            if np.linalg.cond(s) < 20:
                break
        s_inv = np.linalg.inv(s)
        entries = [s @ np.diag(pts[:, i]) @ s_inv for i in range(d)]
    elif kind == "polynomial-in-one-matrix":
        a = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(n)
        sr = max(np.abs(np.linalg.eigvals(a)).max(), 1e-6)
        a = a * (0.7 * radius / sr)
        deg = min(max(n - 1, 1), 3)
        entries = []
        for _ in range(d):
            coeffs = (rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)) / 2.0
            coeffs[0] *= radius  # constant term inside the ball's scale
            m = coeffs[0] * np.eye(n, dtype=complex)
            pw = np.eye(n, dtype=complex)
            for k in range(1, deg + 1):
                pw = pw @ a
                m = m + coeffs[k] * pw
            entries.append(m)
    elif kind == "nilpotent-upper":
        g = np.triu(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), 1)
        entries = []
        for _ in range(d):
            coeffs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            m = np.zeros((n, n), dtype=complex)
            pw = np.eye(n, dtype=complex)
            for k in range(1, n):
                pw = pw @ g
                m = m + coeffs[k] * pw
            entries.append(m)
    else:
        raise StructureError(f"unknown kind {kind!r}")
    T = MatrixTuple(entries)
    if kind != "nilpotent-upper" and spectral_radius is not None:
        # points were drawn within the requested radius already for the
        # diagonal kind; clamp the polynomial kind by measurement
        rho = joint_spectrum(T).max_norm()
        if rho > spectral_radius and rho > 0:
            T = T.scaled(spectral_radius / rho)
    rn = row_norm(T)
    if rn > row_norm_target and rn > 0:
        T = T.scaled(row_norm_target / rn)
    return T
