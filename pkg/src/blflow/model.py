"""Domain types: vector systems, exponents, concavity candidates, certificates.

Every candidate function in the catalog is a generalized monomial

    B(y) = M * y_1**w_1 * ... * y_n**w_n,

which covers the three supported variants: ``young`` (all weights in (0,1)),
``product`` (all weights 1) and ``lifted`` (a monomial prefactor times a
weighted geometric mean of two designated variables, itself a monomial).
Keeping the catalog monomial makes gradients and Hessians exact, which is
what the downstream certificate checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateRejection, DomainError, StructuralError

# default tolerances, sized for double precision at desk scale (k <= 4, n <= 8)
RANK_TOL = 1e-9
FD_TOL = 1e-6
HOMOG_TOL = 1e-8
SYM_TOL = 1e-12

#: named one-homogeneous concave sections phi(u, v); value is the exponent
#: of the first variable in the weighted geometric mean u**theta * v**(1-theta)
SECTION_CATALOG = {
    "sqrt_uv": 0.5,
}


def numerical_rank(M, tol: float = RANK_TOL) -> int:
    """Number of singular values above tol times the largest one."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise StructuralError("matrix has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def psd_leq_zero(M, tol: float = 1e-9) -> bool:
    """True iff the symmetric matrix M is negative semidefinite up to tol."""
    M = np.asarray(M, dtype=float)
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > tol:
        raise StructuralError(f"matrix asymmetry {asym:g} exceeds tol {tol:g}")
    eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
    return bool(eigs[-1] <= tol)


@dataclass(frozen=True)
class VectorSystem:
    """The k x n matrix A whose j-th column is the vector a_j."""

    A: np.ndarray
    rank_tol: float = RANK_TOL

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        k, n = A.shape
        if not (1 <= k <= n):
            raise StructuralError(f"need 1 <= k <= n, got k={k}, n={n}")
        norms = np.linalg.norm(A, axis=0)
        if np.any(norms == 0.0):
            raise StructuralError("every column of A must be nonzero")
        if numerical_rank(A, self.rank_tol) < k:
            raise StructuralError("rank(A) < k")

    @property
    def k(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.A[:, j]


@dataclass(frozen=True)
class Exponents:
    """The vector (1/p_1, ..., 1/p_n); each entry in (0, 1].

    The homogeneity constraint sum(1/p_j) = k is enforced by the callers
    that need it, so polytope queries may probe arbitrary points.
    """

    inv_p: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.inv_p, dtype=float).ravel()
        object.__setattr__(self, "inv_p", v)
        if v.size == 0 or np.any(v <= 0.0) or np.any(v > 1.0):
            raise StructuralError("each 1/p_j must lie in (0, 1]")

    @property
    def n(self) -> int:
        return self.inv_p.size

    @property
    def p(self) -> np.ndarray:
        return 1.0 / self.inv_p

    def require_degree(self, k: int, tol: float = 1e-12) -> None:
        s = float(self.inv_p.sum())
        if abs(s - k) > tol:
            raise StructuralError(f"sum(1/p_j) = {s!r} differs from k = {k}")


@dataclass(frozen=True)
class BellmanSpec:
    """A candidate function B with exact evaluate/gradient/Hessian oracles.

    Internally B(y) = coeff * prod(y_j ** weights_j).  ``variant`` records
    which catalog family the instance came from.
    """

    variant: str
    coeff: float
    weights: np.ndarray
    section_vars: tuple[int, int] | None = None
    theta: float | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        object.__setattr__(self, "weights", w)
        if self.coeff <= 0.0:
            raise StructuralError("prefactor must be positive")
        if np.any(w <= 0.0) or np.any(w > 1.0 + 1e-15):
            raise StructuralError("monomial weights must lie in (0, 1]")

    # -- constructors ------------------------------------------------------

    @classmethod
    def young(cls, alpha) -> "BellmanSpec":
        alpha = np.asarray(alpha, dtype=float).ravel()
        if np.any(alpha <= 0.0) or np.any(alpha >= 1.0):
            raise StructuralError("Young exponents must lie strictly in (0, 1)")
        return cls("young", 1.0, alpha)

    @classmethod
    def product(cls, M: float, n: int) -> "BellmanSpec":
        return cls("product", float(M), np.ones(n))

    @classmethod
    def lifted(cls, phi_id: str, alpha=(), section_vars: tuple[int, int] | None = None,
               theta: float | None = None) -> "BellmanSpec":
        """Monomial prefactor with exponents alpha times the section phi.

        By default the section occupies the last two variables; pass
        ``section_vars`` to place it elsewhere (the prefactor exponents then
        apply to the remaining variables in order).
        """
        if phi_id in SECTION_CATALOG:
            th = SECTION_CATALOG[phi_id]
        elif phi_id == "geomean":
            if theta is None or not (0.0 < theta < 1.0):
                raise StructuralError("geomean section needs theta in (0, 1)")
            th = float(theta)
        else:
            raise StructuralError(f"unknown section {phi_id!r}; catalog: "
                                  f"{sorted(SECTION_CATALOG)} or 'geomean'")
        alpha = np.asarray(alpha, dtype=float).ravel()
        if np.any(alpha <= 0.0) or np.any(alpha > 1.0):
            raise StructuralError("prefactor exponents must lie in (0, 1]")
        n = alpha.size + 2
        if section_vars is None:
            section_vars = (n - 2, n - 1)
        p, q = section_vars
        if p == q or not (0 <= p < n and 0 <= q < n):
            raise StructuralError("section variables must be two distinct indices")
        w = np.empty(n)
        rest = [j for j in range(n) if j not in (p, q)]
        w[rest] = alpha
        w[p] = th
        w[q] = 1.0 - th
        return cls("lifted", 1.0, w, section_vars=(p, q), theta=th)

    # -- basic facts -------------------------------------------------------

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def degree(self) -> float:
        return float(self.weights.sum())

    # -- oracles -----------------------------------------------------------

    def evaluate(self, y) -> np.ndarray | float:
        """B(y); y may carry leading batch dimensions, last axis length n."""
        y = np.asarray(y, dtype=float)
        if np.any(y < 0.0):
            raise DomainError("B is only defined on the nonnegative orthant")
        val = self.coeff * np.prod(np.power(y, self.weights), axis=-1)
        return val if val.ndim else float(val)

    def _interior(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.n:
            raise StructuralError(f"expected point of length {self.n}")
        if np.any(y <= 0.0):
            raise DomainError("derivatives require an interior point (all y_j > 0)")
        return y

    def gradient(self, y) -> np.ndarray:
        y = self._interior(y)
        return self.evaluate(y) * self.weights / y

    def hessian(self, y) -> np.ndarray:
        y = self._interior(y)
        b = self.evaluate(y)
        r = self.weights / y
        H = b * np.outer(r, r)
        # diagonal via w(w-1)/y^2 so unit weights give exact zeros
        np.fill_diagonal(H, b * self.weights * (self.weights - 1.0) / y**2)
        return H


def lift_section(phi_id: str, alpha=(), section_vars=None, theta=None) -> BellmanSpec:
    """Build a lifted-section candidate from the section catalog."""
    return BellmanSpec.lifted(phi_id, alpha, section_vars=section_vars, theta=theta)


def euler_check(B: BellmanSpec, y, k: float | None = None,
                homog_tol: float = HOMOG_TOL) -> tuple[bool, float]:
    """Degree-k homogeneity test <grad B(y), y> = k * B(y) at an interior point.

    Returns (ok, defect) where defect = |<grad B, y> - k B| and ok means the
    defect is below homog_tol * (1 + |B(y)|).
    """
    y = np.asarray(y, dtype=float).ravel()
    if np.any(y <= 0.0):
        raise DomainError("homogeneity check requires all y_j > 0")
    if k is None:
        k = B.degree
    b = B.evaluate(y)
    defect = abs(float(B.gradient(y) @ y) - k * b)
    return defect <= homog_tol * (1.0 + abs(b)), defect


@dataclass(frozen=True)
class GaussCert:
    """A candidate certificate: symmetric matrix C plus auxiliary weights.

    sigma_j = <C a_j, a_j> must be positive for every column; when produced
    by the solver, s_j^2 = 1 / (p_j * sigma_j).
    """

    C: np.ndarray
    s_sq: np.ndarray
    sigma: np.ndarray
    residual: float
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "s_sq", np.asarray(self.s_sq, dtype=float).ravel())
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float).ravel())
        scale = max(1.0, float(np.max(np.abs(C))))
        if np.max(np.abs(C - C.T)) > SYM_TOL * scale:
            raise StructuralError("C must be symmetric within 1e-12")
        if np.any(self.sigma <= 0.0):
            raise CertificateRejection("<C a_j, a_j> must be positive for every j")
        if np.any(self.s_sq <= 0.0):
            raise CertificateRejection("s_j^2 must be positive")

    @property
    def k(self) -> int:
        return self.C.shape[0]


def make_cert(sys: VectorSystem, C, s_sq=None, e: Exponents | None = None,
              residual: float = 0.0, notes: tuple[str, ...] = ()) -> GaussCert:
    """Assemble a GaussCert from an explicit matrix C.

    When s_sq is omitted it is filled in from the defining relation
    s_j^2 = (1/p_j) / sigma_j, using e if given and uniform weights 1/n
    otherwise.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    sigma = np.einsum("ij,ik,kj->j", sys.A, C, sys.A)
    if np.any(sigma <= 0.0):
        raise CertificateRejection("<C a_j, a_j> must be positive for every j")
    if s_sq is None:
        inv_p = e.inv_p if e is not None else np.full(sys.n, 1.0 / sys.n)
        s_sq = inv_p / sigma
    return GaussCert(C=C, s_sq=s_sq, sigma=sigma, residual=residual, notes=notes)
