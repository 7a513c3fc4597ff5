"""Operational checks of the concavity certificate and its consequences.

The central object is the Hadamard form

    H(y) = (A^T C A) o Hess B(y),      o = entrywise product,

which must be negative semidefinite at every interior point (the concavity
condition), must be annihilated on the left by A D(y) with
D(y) = diag(y_j / sigma_j) (the second-order PDE identity), and must have
rank at most n - k.  Certificates are verified on deterministic
pseudo-random samples with the seed recorded in the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import DomainError, QuadratureAnomaly
from .model import BellmanSpec, GaussCert, VectorSystem, numerical_rank, psd_leq_zero

SAMPLE_COUNT = 1000
SAMPLE_LO = 1e-2
SAMPLE_HI = 1e2
L3_TOL = 1e-9
PDE_TOL = 1e-8
RANK_TOL = 1e-6
KN_TOL = 1e-10
L5_BOXES = (4.0, 6.0, 8.0, 10.0)
L5_REL_TOL = 1e-6


def sample_interior(n: int, count: int = SAMPLE_COUNT, seed: int = 0,
                    lo: float = SAMPLE_LO, hi: float = SAMPLE_HI) -> np.ndarray:
    """Log-uniform interior samples on [lo, hi]^n; fixed seed for reproducibility."""
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=(count, n)))


def hadamard_form(sys: VectorSystem, cert: GaussCert, B: BellmanSpec, y) -> np.ndarray:
    """Entrywise product of the Gram matrix <C a_i, a_j> with Hess B(y)."""
    y = np.asarray(y, dtype=float).ravel()
    if np.any(y <= 0.0):
        raise DomainError("Hadamard form requires an interior point")
    G = sys.A.T @ cert.C @ sys.A
    return G * B.hessian(y)


@dataclass(frozen=True)
class L3Report:
    ok: bool
    worst_eig: float
    worst_point: np.ndarray
    samples: int


def check_L3(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
             samples: np.ndarray | None = None, tol: float = L3_TOL,
             seed: int = 0) -> L3Report:
    """Negative semidefiniteness of the Hadamard form on every sample."""
    if samples is None:
        samples = sample_interior(B.n, seed=seed)
    worst = -np.inf
    worst_point = samples[0]
    ok = True
    for y in samples:
        H = hadamard_form(sys, cert, B, y)
        top = float(np.linalg.eigvalsh(0.5 * (H + H.T))[-1])
        if top > worst:
            worst, worst_point = top, y
        if not psd_leq_zero(H, tol=tol):
            ok = False
    return L3Report(ok=ok, worst_eig=worst, worst_point=np.asarray(worst_point),
                    samples=len(samples))


def pde_defect(sys: VectorSystem, cert: GaussCert, B: BellmanSpec, y) -> float:
    """Normalized Frobenius defect of A D(y) [(A^T C A) o Hess B(y)] = 0."""
    y = np.asarray(y, dtype=float).ravel()
    H = hadamard_form(sys, cert, B, y)
    D = y / cert.sigma
    R = sys.A @ (D[:, None] * H)
    hess_norm = float(np.linalg.norm(B.hessian(y)))
    scale = (np.linalg.norm(sys.A, 2) * float(np.max(np.abs(D))) * hess_norm)
    if scale == 0.0:
        return float(np.linalg.norm(R))
    return float(np.linalg.norm(R)) / scale


def check_pde_identity(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                       samples: np.ndarray | None = None, tol: float = PDE_TOL,
                       seed: int = 0) -> tuple[bool, float]:
    """Worst normalized PDE defect over the samples; pass iff below tol."""
    if samples is None:
        samples = sample_interior(B.n, seed=seed)
    worst = max(pde_defect(sys, cert, B, y) for y in samples)
    return worst <= tol, worst


def check_rank_bound(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                     samples: np.ndarray | None = None, tol: float = RANK_TOL,
                     seed: int = 0) -> tuple[bool, int, np.ndarray]:
    """rank((A^T C A) o Hess B(y)) <= n - k at every sample.

    Returns (ok, worst_rank, per-sample ranks).
    """
    if samples is None:
        samples = sample_interior(B.n, seed=seed)
    ranks = np.array([numerical_rank(hadamard_form(sys, cert, B, y), tol=tol)
                      for y in samples])
    worst = int(ranks.max())
    return worst <= sys.n - sys.k, worst, ranks


def check_kn_structure(B: BellmanSpec, samples: np.ndarray | None = None,
                       tol: float = KN_TOL, seed: int = 0) -> tuple[bool, float]:
    """Diagonal Hessian entries vanish (the degree-n product structure).

    Holds exactly for the product family and fails for every other catalog
    member, so it doubles as a negative control.
    """
    if samples is None:
        samples = sample_interior(B.n, count=100, seed=seed)
    worst = 0.0
    for y in samples:
        H = B.hessian(y)
        b = abs(B.evaluate(y))
        rel = float(np.max(np.abs(np.diag(H)))) / max(b, 1e-300)
        worst = max(worst, rel)
    return worst <= tol, worst


@dataclass(frozen=True)
class L5Report:
    converged: bool
    value: float
    values: tuple[float, ...]
    anomaly: str | None = None


def check_L5(sys: VectorSystem, B: BellmanSpec, boxes=L5_BOXES,
             rel_tol: float = L5_REL_TOL) -> L5Report:
    """Integrability probe: B(exp(-<a_1,x>^2), ...) over growing boxes.

    Converged when the values over successive boxes agree to rel_tol; the
    integrand is nonnegative, so a drop between boxes is flagged as a
    numerical anomaly.
    """
    def integrand(X):
        proj = X @ sys.A
        return B.evaluate(np.exp(-proj**2))

    values = []
    for L in boxes:
        res = quadrature.tensor_quad(integrand, sys.k, L, rel_tol=1e-9, n0=32)
        values.append(res.value)
    values = tuple(values)
    for a, b in zip(values[:-1], values[1:]):
        if b < a - 1e-9 * max(abs(a), 1.0):
            raise QuadratureAnomaly(
                f"L5 probe decreased between boxes: {a!r} -> {b!r}")
    last, prev = values[-1], values[-2]
    converged = abs(last - prev) <= rel_tol * max(abs(last), 1e-300)
    return L5Report(converged=converged, value=last, values=values)


@dataclass(frozen=True)
class VerifierReport:
    """Aggregate of the certificate checks with the tolerances used."""

    l3_ok: bool
    l3_max_eig: float
    pde_ok: bool
    pde_defect: float
    rank_ok: bool
    rank_worst: int
    euler_defect: float
    l5: L5Report
    samples: int
    seed: int
    tolerances: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.l3_ok and self.pde_ok and self.rank_ok and self.l5.converged


def verify(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
           count: int = SAMPLE_COUNT, seed: int = 0,
           l3_tol: float = L3_TOL, pde_tol: float = PDE_TOL) -> VerifierReport:
    """Run the full check battery on one (A, C, B) triple."""
    samples = sample_interior(B.n, count=count, seed=seed)
    l3 = check_L3(sys, cert, B, samples, tol=l3_tol)
    pde_ok, worst_pde = check_pde_identity(sys, cert, B, samples, tol=pde_tol)
    rank_ok, worst_rank, _ = check_rank_bound(sys, cert, B, samples)
    euler_worst = 0.0
    for y in samples[: min(100, len(samples))]:
        _, defect = euler_defect_at(B, y)
        euler_worst = max(euler_worst, defect)
    l5 = check_L5(sys, B)
    return VerifierReport(
        l3_ok=l3.ok, l3_max_eig=l3.worst_eig,
        pde_ok=pde_ok, pde_defect=worst_pde,
        rank_ok=rank_ok, rank_worst=worst_rank,
        euler_defect=euler_worst, l5=l5,
        samples=count, seed=seed,
        tolerances={"l3_tol": l3_tol, "pde_tol": pde_tol,
                    "rank_tol": RANK_TOL, "l5_rel_tol": L5_REL_TOL},
    )


def euler_defect_at(B: BellmanSpec, y) -> tuple[bool, float]:
    """Relative homogeneity defect at one point (see model.euler_check)."""
    from .model import euler_check

    ok, defect = euler_check(B, y)
    b = abs(B.evaluate(np.asarray(y, dtype=float)))
    return ok, defect / (1.0 + b)
