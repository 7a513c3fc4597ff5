"""Solve for the certifying matrix C and verify its algebraic identities.

The auxiliary weights s_j^2 satisfy the nonlinear system

    1/p_j = s_j^2 <M(s)^{-1} a_j, a_j>,   M(s) = A diag(s^2) A^T,

solved by damped fixed-point iteration.  The certificate is then
C = M(s)^{-1}; its quality is measured by the Frobenius defect of
A diag(1/(p_j sigma_j)) A^T C = I and by the spectrum of the projector
P = (A S)^T C (A S), S = diag(s_j), which must be an orthogonal projection
of rank k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CertificateRejection, IterationError
from .model import Exponents, GaussCert, VectorSystem, numerical_rank

DAMPING = 0.5
MAX_ITER = 5000
RES_TOL = 1e-10


@dataclass(frozen=True)
class SSystemResult:
    s_sq: np.ndarray
    residual: float
    iterations: int
    converged: bool
    notes: tuple[str, ...] = ()


def _system_residual(sys: VectorSystem, e: Exponents, s_sq: np.ndarray) -> tuple[float, np.ndarray]:
    """Max-norm residual of the defining equations plus <M^{-1} a_j, a_j>."""
    M = (sys.A * s_sq) @ sys.A.T
    try:
        cho = scipy.linalg.cho_factor(M)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise IterationError("M(s) is numerically singular or non-finite") from exc
    quad = np.einsum("ij,ij->j", sys.A, scipy.linalg.cho_solve(cho, sys.A))
    res = float(np.max(np.abs(e.inv_p - s_sq * quad)))
    return res, quad


def solve_s_system(sys: VectorSystem, e: Exponents, damping: float = DAMPING,
                   max_iter: int = MAX_ITER, res_tol: float = RES_TOL,
                   s0=None) -> SSystemResult:
    """Damped fixed-point iteration for the auxiliary weights.

    Each step proposes s_j^2 = (1/p_j) / <M(s)^{-1} a_j, a_j>, blends it with
    the previous iterate, and renormalizes to sum(s^2) = 1 (the scale freedom
    of the certificate is fixed by this normalization).
    """
    s_sq = (np.full(sys.n, 1.0 / sys.n) if s0 is None
            else np.asarray(s0, dtype=float).ravel())
    s_sq = s_sq / s_sq.sum()
    residual = np.inf
    for it in range(1, max_iter + 1):
        residual, quad = _system_residual(sys, e, s_sq)
        if residual <= res_tol:
            return SSystemResult(s_sq, residual, it, True)
        proposal = e.inv_p / quad
        s_sq = damping * proposal + (1.0 - damping) * s_sq
        s_sq /= s_sq.sum()
    return SSystemResult(s_sq, residual, max_iter, False,
                         notes=(f"no convergence in {max_iter} iterations",))


def build_C(sys: VectorSystem, e: Exponents, s_sq,
            notes: tuple[str, ...] = ()) -> GaussCert:
    """Certificate C = (A diag(s^2) A^T)^{-1} with its consistency residual.

    The residual is max_j |1/p_j - s_j^2 sigma_j| * p_j, i.e. how well the
    weights satisfy their defining relation s_j^2 = 1/(p_j sigma_j).  Any
    sigma_j <= 0 rejects the certificate.
    """
    s_sq = np.asarray(s_sq, dtype=float).ravel()
    if np.any(s_sq <= 0.0):
        raise CertificateRejection("s_j^2 must be positive")
    M = (sys.A * s_sq) @ sys.A.T
    try:
        C = scipy.linalg.inv(M)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise IterationError("M(s) is numerically singular or non-finite") from exc
    C = 0.5 * (C + C.T)
    sigma = np.einsum("ij,ik,kj->j", sys.A, C, sys.A)
    if np.any(sigma <= 0.0):
        raise CertificateRejection("<C a_j, a_j> <= 0 for some column")
    residual = float(np.max(np.abs(e.inv_p - s_sq * sigma) / e.inv_p))
    return GaussCert(C=C, s_sq=s_sq, sigma=sigma, residual=residual, notes=notes)


def certificate_defect(sys: VectorSystem, e: Exponents, cert: GaussCert) -> float:
    """Frobenius norm of A diag(1/(p_j sigma_j)) A^T C - I."""
    d = e.inv_p / cert.sigma
    M = (sys.A * d) @ sys.A.T
    return float(np.linalg.norm(M @ cert.C - np.eye(sys.k)))


@dataclass(frozen=True)
class ProjectionReport:
    ok: bool
    eigenvalues: np.ndarray
    rank: int
    idempotency_defect: float
    symmetry_defect: float
    trace: float
    diag_bound_ok: bool


def projection_check(sys: VectorSystem, cert: GaussCert,
                     idem_tol: float = 1e-9, eig_tol: float = 1e-8) -> ProjectionReport:
    """Check that P = (A S)^T C (A S) is an orthogonal projection of rank k.

    Equivalently A^T C A <= diag(1/s_j^2): the scaled Gram form never exceeds
    the identity.
    """
    S = np.sqrt(cert.s_sq)
    AS = sys.A * S
    P = AS.T @ cert.C @ AS
    sym = float(np.max(np.abs(P - P.T)))
    idem = float(np.linalg.norm(P @ P - P))
    eigs = np.linalg.eigvalsh(0.5 * (P + P.T))
    on_01 = bool(np.all(np.minimum(np.abs(eigs), np.abs(eigs - 1.0)) <= eig_tol))
    rank = numerical_rank(P, tol=1e-8)
    gram = sys.A.T @ cert.C @ sys.A - np.diag(1.0 / cert.s_sq)
    diag_bound_ok = bool(np.linalg.eigvalsh(0.5 * (gram + gram.T))[-1] <= eig_tol)
    ok = sym <= idem_tol and idem <= idem_tol and on_01 and rank == sys.k
    return ProjectionReport(ok=ok, eigenvalues=eigs, rank=rank,
                            idempotency_defect=idem, symmetry_defect=sym,
                            trace=float(np.trace(P)), diag_bound_ok=diag_bound_ok)


def solve_certificate(sys: VectorSystem, e: Exponents, boundary_slack: float | None = None,
                      **solver_kw) -> tuple[GaussCert, SSystemResult]:
    """Convenience chain: solve the s^2 system then build C.

    ``boundary_slack`` (the polytope LP slack, when known) attaches a warning
    to the certificate for exponents within 1e-6 of the boundary, where the
    iteration may stall.
    """
    result = solve_s_system(sys, e, **solver_kw)
    notes = result.notes
    if boundary_slack is not None and boundary_slack < 1e-6:
        notes = notes + ("exponents within 1e-6 of the polytope boundary; "
                         "convergence may stall",)
    cert = build_C(sys, e, result.s_sq, notes=notes)
    return cert, result
