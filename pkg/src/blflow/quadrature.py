"""Tensor-product quadrature for smooth, rapidly decaying integrands.

Midpoint rule on the cube [-L, L]^k with grid doubling and Richardson
extrapolation.  The midpoint rule has an even error expansion in the mesh
width, so the classical Romberg weights apply.  Integrands are assumed
smooth on the cube; discontinuous initial data is handled upstream by
splitting the axis at the breakpoints (see :func:`panel_quad_1d`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureAnomaly, UnsupportedScaleError

#: hard cap on the ambient dimension of the tensor grid
MAX_DIM = 3

#: evaluate integrands in chunks of this many points to bound memory
_CHUNK = 1 << 20


@dataclass(frozen=True)
class QuadResult:
    value: float
    halfwidth: float
    levels: int
    nodes_per_axis: int
    converged: bool


def _midpoint_sum(f, k: int, L: float, m: int) -> float:
    """Composite midpoint sum of f over [-L, L]^k with m nodes per axis."""
    h = 2.0 * L / m
    axis = -L + h * (np.arange(m) + 0.5)
    total = 0.0
    if k == 1:
        for start in range(0, m, _CHUNK):
            pts = axis[start:start + _CHUNK, None]
            total += float(np.sum(f(pts)))
        return total * h
    grids = np.meshgrid(*([axis] * k), indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=-1)
    for start in range(0, flat.shape[0], _CHUNK):
        total += float(np.sum(f(flat[start:start + _CHUNK])))
    return total * h**k


def tensor_quad(f, k: int, L: float, rel_tol: float = 1e-8,
                n0: int = 16, max_levels: int = 9) -> QuadResult:
    """Integrate ``f`` over [-L, L]^k to a relative tolerance.

    Parameters
    ----------
    f : callable
        Maps an (m, k) array of points to an (m,) array of values.
    k : int
        Dimension, at most ``MAX_DIM``.
    L : float
        Half-width of the integration cube.
    rel_tol : float
        Stop when successive Richardson diagonal entries agree to this
        relative tolerance.
    n0 : int
        Nodes per axis on the coarsest grid.
    max_levels : int
        Number of doublings to attempt before reporting non-convergence.
    """
    if k > MAX_DIM:
        raise UnsupportedScaleError(f"tensor quadrature supports k <= {MAX_DIM}, got k={k}")
    # keep the total node count sane in higher dimension
    levels = max_levels if k == 1 else (min(max_levels, 7) if k == 2 else min(max_levels, 5))
    rows: list[list[float]] = []
    value = math.nan
    m = n0
    for i in range(levels):
        row = [_midpoint_sum(f, k, L, m)]
        for j in range(1, i + 1):
            fac = 4.0**j
            row.append((fac * row[j - 1] - rows[i - 1][j - 1]) / (fac - 1.0))
        rows.append(row)
        value = row[-1]
        if i > 0:
            prev = rows[i - 1][-1]
            scale = max(abs(value), abs(prev), 1e-300)
            if abs(value - prev) <= rel_tol * scale:
                return QuadResult(value, L, i + 1, m, True)
        m *= 2
    return QuadResult(value, L, levels, m // 2, False)


def tensor_quad_strict(f, k: int, L: float, rel_tol: float = 1e-8, **kw) -> QuadResult:
    """Like :func:`tensor_quad` but raises on non-convergence."""
    res = tensor_quad(f, k, L, rel_tol=rel_tol, **kw)
    if not res.converged:
        raise QuadratureAnomaly(
            f"tensor quadrature did not reach rel_tol={rel_tol:g} on [-{L:g},{L:g}]^{k}")
    return res


def gaussian_halfwidth(decay: float, log_tail: float = 34.0) -> float:
    """Half-width L so that exp(-decay * L**2) < exp(-log_tail).

    ``decay`` is the smallest eigenvalue of the quadratic form bounding the
    integrand, so the tail outside the cube is negligible relative to the
    interior contribution.
    """
    if decay <= 0:
        raise ValueError("decay coefficient must be positive")
    return math.sqrt(log_tail / decay)


def panel_quad_1d(f, breakpoints, L: float, rel_tol: float = 1e-10,
                  n0: int = 8, max_levels: int = 12) -> QuadResult:
    """Integrate a piecewise-smooth function of one variable over [-L, L].

    The axis is split at the given breakpoints and the midpoint/Richardson
    scheme is applied per panel.  For piecewise-constant integrands (box
    initial data at time zero) a single midpoint panel is already exact.
    """
    cuts = sorted({-L, L, *(float(b) for b in breakpoints if -L < b < L)})
    total = 0.0
    converged = True
    levels_used = 1
    for a, b in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        res = tensor_quad(lambda x: f(x + mid), 1, half,
                          rel_tol=rel_tol, n0=n0, max_levels=max_levels)
        total += res.value
        converged &= res.converged
        levels_used = max(levels_used, res.levels)
    return QuadResult(total, L, levels_used, 0, converged)
