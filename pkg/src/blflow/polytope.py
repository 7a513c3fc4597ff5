"""Finiteness of the sharp constant via the basis-indicator polytope.

Enumerate the k-subsets of columns of A that form a basis of R^k, take the
convex hull K of their 0/1 indicator vectors, and classify a point of
exponents as inside / boundary / outside K.  Membership is decided by a
small linear program over the vertex list, which is fine at desk scale
(C(n, k) stays in the hundreds for n <= 12).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import StructuralError
from .model import Exponents, VectorSystem

BASIS_TOL = 1e-9
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class BasisIndicatorSet:
    """0/1 indicator vectors of the column subsets that form bases."""

    subsets: tuple[tuple[int, ...], ...]
    vectors: np.ndarray  # shape (m, n), one row per subset

    @property
    def count(self) -> int:
        return len(self.subsets)


@dataclass(frozen=True)
class MembershipVerdict:
    verdict: str  # "inside" | "boundary" | "outside"
    weights: np.ndarray | None  # convex weights over the indicator vectors
    slack: float  # optimal minimum weight (the LP objective)
    basis_count: int


def enumerate_bases(sys: VectorSystem, basis_tol: float = BASIS_TOL) -> BasisIndicatorSet:
    """All k-subsets of columns with a nonsingular k x k submatrix.

    Subsets are returned in lexicographic order of their index sets.  The
    determinant test is scale invariant: |det| must exceed basis_tol times
    the product of the column norms.
    """
    A = sys.A
    k, n = sys.k, sys.n
    norms = np.linalg.norm(A, axis=0)
    subsets = []
    rows = []
    for idx in combinations(range(n), k):
        sub = A[:, idx]
        if abs(np.linalg.det(sub)) > basis_tol * float(np.prod(norms[list(idx)])):
            subsets.append(idx)
            v = np.zeros(n)
            v[list(idx)] = 1.0
            rows.append(v)
    if not subsets:
        # cannot happen for a valid VectorSystem (rank(A) = k)
        raise StructuralError("no basis subsets found: rank(A) < k")
    return BasisIndicatorSet(tuple(subsets), np.asarray(rows))


def is_finite(sys: VectorSystem, e: Exponents,
              boundary_tol: float = BOUNDARY_TOL,
              bases: BasisIndicatorSet | None = None) -> MembershipVerdict:
    """Classify (1/p_1, ..., 1/p_n) against the polytope K.

    The point lies in the relative interior of K exactly when it admits a
    convex representation with all weights strictly positive, so we maximize
    the minimum weight t subject to V^T lam = e, sum(lam) = 1, lam_i >= t.
    Infeasible -> outside; t within boundary_tol of zero -> boundary.
    """
    if bases is None:
        bases = enumerate_bases(sys)
    V = bases.vectors  # (m, n)
    m = bases.count
    if e.n != sys.n:
        raise StructuralError("exponent vector length differs from n")

    # variables: (lam_1..lam_m, t); maximize t
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_eq = np.zeros((sys.n + 1, m + 1))
    A_eq[:sys.n, :m] = V.T
    A_eq[sys.n, :m] = 1.0
    b_eq = np.concatenate([e.inv_p, [1.0]])
    A_ub = np.zeros((m, m + 1))
    A_ub[:, :m] = -np.eye(m)
    A_ub[:, -1] = 1.0
    b_ub = np.zeros(m)
    bounds = [(0.0, 1.0)] * m + [(-1.0, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if not res.success:
        return MembershipVerdict("outside", None, float("-inf"), m)
    lam = res.x[:m]
    slack = float(res.x[-1])
    verdict = "inside" if slack > boundary_tol else "boundary"
    return MembershipVerdict(verdict, lam, slack, m)
