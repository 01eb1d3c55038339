"""Biholomorphic automorphisms of the unit ball and their tuple action.

Every automorphism used here is a Moebius involution phi_b followed by a
unitary: theta(z) = U phi_b(z), with

    phi_b(z) = (b - P_b z - s_b Q_b z) / (1 - <z, b>),

P_b the orthogonal projection onto span(b), Q_b = I - P_b and
s_b = sqrt(1 - |b|^2).  phi_b swaps b and 0 and is an involution; phi_0 = -id.
The same rational formula applies to a commuting matrix tuple with spectrum
inside the ball, which is how functions get precomposed with automorphisms
in the constructive multiplier algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, PreconditionError, StructureError
from .polynomials import Polynomial
from .tuples import (
    MatrixTuple,
    SPECTRAL_MARGIN,
    UNITARY_TOL,
    joint_spectrum,
    is_jointly_diagonalizable,
)

RCOND_MIN = 1e-12


@dataclass(frozen=True)
class BallAutomorphism:
    """theta(z) = unitary @ phi_base(z)."""

    base: np.ndarray     # point of B_d mapped to 0 by the involution part
    unitary: np.ndarray  # d x d unitary applied after the involution

    def __post_init__(self):
        b = np.asarray(self.base, dtype=complex).reshape(-1)
        u = np.asarray(self.unitary, dtype=complex)
        d = b.shape[0]
        if u.shape != (d, d):
            raise StructureError(f"unitary shape {u.shape} does not match base dimension {d}")
        if np.linalg.norm(b) >= 1.0:
            raise DomainError("base point must lie strictly inside the ball")
        if np.linalg.norm(u.conj().T @ u - np.eye(d)) > UNITARY_TOL * max(1.0, d):
            raise StructureError("unitary factor fails the unitarity tolerance")
        b.setflags(write=False)
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "base", b)
        object.__setattr__(self, "unitary", u)

    @property
    def d(self) -> int:
        return self.base.shape[0]

    def inverse(self) -> "BallAutomorphism":
        # theta = U phi_b  =>  theta^{-1} = phi_b U* = U* phi_{U b}
        u = self.unitary
        return BallAutomorphism(base=u @ self.base, unitary=u.conj().T)

    def denominator_polynomial(self) -> Polynomial:
        """1 - <z, b> as a polynomial in z."""
        d = self.d
        return Polynomial.one(d) - Polynomial.linear(np.conj(self.base))

    def component_numerators(self) -> list[Polynomial]:
        """Linear numerator polynomials M_j with theta(z)_j = M_j(z)/(1 - <z,b>)."""
        d = self.d
        b = self.base
        beta = float(np.vdot(b, b).real)
        s = float(np.sqrt(max(0.0, 1.0 - beta)))
        comps = []
        for k in range(d):
            # phi_b(z)_k = (b_k - (1-s) <z,b> b_k / beta - s z_k) / (1 - <z,b>)
            num = Polynomial.constant(b[k], d)
            if beta > 0:
                num = num - ((1.0 - s) * b[k] / beta) * Polynomial.linear(np.conj(b))
            num = num - s * Polynomial.coordinate(k, d)
            comps.append(num)
        return [sum(self.unitary[j, k] * comps[k] for k in range(d)) for j in range(d)]


def involution_at(b) -> BallAutomorphism:
    """The Moebius involution phi_b: swaps b and 0, phi_b o phi_b = id."""
    b = np.asarray(b, dtype=complex).reshape(-1)
    if np.linalg.norm(b) >= 1.0:
        raise DomainError("involution base must lie strictly inside the ball")
    return BallAutomorphism(base=b, unitary=np.eye(b.shape[0], dtype=complex))


def unitary_automorphism(u: np.ndarray) -> BallAutomorphism:
    """theta(z) = U z.  (phi_0 = -id, so the stored unitary is -U.)"""
    u = np.asarray(u, dtype=complex)
    return BallAutomorphism(base=np.zeros(u.shape[0], dtype=complex), unitary=-u)


def apply_automorphism_point(theta: BallAutomorphism, z) -> np.ndarray:
    """theta(z) for a point (d,) or batch (N, d) strictly inside the ball."""
    z = np.asarray(z, dtype=complex)
    single = z.ndim == 1
    if single:
        z = z[None, :]
    if z.shape[-1] != theta.d:
        raise StructureError("point dimension mismatch")
    norms = np.linalg.norm(z, axis=1)
    if np.any(norms >= 1.0):
        raise DomainError("automorphisms act on points strictly inside the ball")
    b = theta.base
    beta = float(np.vdot(b, b).real)
    s = np.sqrt(max(0.0, 1.0 - beta))
    inner = z @ np.conj(b)  # <z, b>
    if beta > 0:
        pz = (inner / beta)[:, None] * b[None, :]
    else:
        pz = np.zeros_like(z)
    qz = z - pz
    num = b[None, :] - pz - s * qz
    out = num / (1.0 - inner)[:, None]
    out = out @ theta.unitary.T
    return out[0] if single else out


def apply_automorphism_tuple(
    theta: BallAutomorphism,
    T: MatrixTuple,
    margin: float = SPECTRAL_MARGIN,
    check_spectrum: bool = True,
) -> MatrixTuple:
    """Componentwise rational matrix evaluation of theta at a commuting tuple.

    Requires sigma(T) inside the ball; the output tuple commutes and its
    joint spectrum is theta(sigma(T)).
    """
    if T.d != theta.d:
        raise StructureError("tuple and automorphism dimensions differ")
    if check_spectrum:
        rho = joint_spectrum(T).max_norm()
        if rho >= 1.0 - margin:
            raise DomainError(
                f"joint spectrum must lie strictly inside the ball; max |lambda| = {rho:.6f}"
            )
    n = T.n
    eye = np.eye(n, dtype=complex)
    b = theta.base
    beta = float(np.vdot(b, b).real)
    s = np.sqrt(max(0.0, 1.0 - beta))
    w = sum(np.conj(b[i]) * T.entries[i] for i in range(T.d))  # <T, b>
    den = eye - w
    rcond = 1.0 / max(np.linalg.cond(den), 1.0)
    if rcond < RCOND_MIN:
        raise NumericalError(
            f"automorphism denominator I - <T,b> badly conditioned (rcond {rcond:.2e})",
            residual=rcond,
        )
    den_inv = np.linalg.inv(den)
    comps = []
    for k in range(T.d):
        num = b[k] * eye - s * T.entries[k]
        if beta > 0:
            num = num - ((1.0 - s) * b[k] / beta) * w
        comps.append(num @ den_inv)
    u = theta.unitary
    return MatrixTuple([sum(u[j, k] * comps[k] for k in range(T.d)) for j in range(T.d)])


# ----------------------------------------------------------------------
# Variable reduction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpanReduction:
    unitary: np.ndarray
    reduced: MatrixTuple
    rank: int
    finding: str | None  # set when the commutative-dimension bound is violated


def reduce_variables_diagonalizable(
    T: MatrixTuple,
    tol: float = 1e-8,
    seed: int = 0,
) -> tuple[BallAutomorphism, MatrixTuple]:
    """Move one joint eigenvalue to 0 and rotate the span of the remaining
    spectrum into the first n-1 coordinates; for a jointly diagonalizable
    tuple with d >= n every later entry of theta(T) vanishes.

    The eigenvalue sent to the origin is the one of largest norm (ties:
    lowest index), which keeps the involution well conditioned.
    """
    diag = is_jointly_diagonalizable(T, tol=max(tol, 1e-8), seed=seed)
    if diag.diagonalizable is not True:
        status = "indeterminate" if diag.diagonalizable is None else "not diagonalizable"
        raise PreconditionError(
            f"tuple is {status} (eigenvector condition {diag.condition:.3e}, "
            f"off-diagonal residual {diag.offdiag_residual:.3e})"
        )
    spec = joint_spectrum(T)
    pts = spec.points
    norms = np.linalg.norm(pts, axis=1)
    pick = int(np.argmax(np.round(norms, 12)))
    lam = pts[pick]
    phi = involution_at(lam)
    moved = apply_automorphism_point(phi, pts)
    # rotate span(moved points, the moved pick is 0) into the leading coordinates
    rest = np.delete(moved, pick, axis=0)
    if rest.size:
        _, _, vh = np.linalg.svd(rest, full_matrices=True)
        u = np.conj(vh)  # rows are transposed right-singular vectors: U = V^T
    else:
        u = np.eye(T.d, dtype=complex)
    theta = BallAutomorphism(base=lam, unitary=u)
    return theta, apply_automorphism_tuple(theta, T)


def reduce_variables_span(T: MatrixTuple, tol: float = 1e-10) -> SpanReduction:
    """Rotate variables by a unitary so only the first r entries of U . T are
    nonzero, r = numerical rank of span(T_1, ..., T_d).

    A commutative subalgebra of the n x n matrices has dimension at most
    floor(n^2/4) + 1, so r <= min(d, floor(n^2/4) + 1) for commuting input;
    a violation is reported as a finding on the result, not clipped.
    """
    d, n = T.d, T.n
    c = np.stack([a.reshape(-1) for a in T.entries])  # (d, n^2); vec(Phi(alpha)) = C^T alpha
    # right singular vectors of C^T split ker(Phi) from its complement
    _, sv, vh = np.linalg.svd(c.T, full_matrices=True)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > tol * max(smax, 1.0))) if smax > 0 else 0
    basis = np.conj(vh).T  # columns u_j; Phi(u_j) = 0 for j >= rank
    u = basis.T  # rows u_j^T, unitary (transpose of unitary)
    new_entries = [
        sum(u[j, k] * T.entries[k] for k in range(d)) for j in range(d)
    ]
    bound = n * n // 4 + 1
    finding = None
    if rank > min(d, bound):
        finding = (
            f"span rank {rank} exceeds the commutative-dimension bound "
            f"min(d, floor(n^2/4)+1) = {min(d, bound)}"
        )
    reduced = MatrixTuple(new_entries)
    return SpanReduction(unitary=u, reduced=reduced, rank=rank, finding=finding)
