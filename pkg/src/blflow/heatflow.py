"""Heat-flow energies: exact kernels, the energy trace, and its limits.

Initial data comes from a small catalog (boxes, Gaussians, sums of boxes),
all dominated by b * exp(-delta y^2), so heat extensions have closed forms
(error functions / Gaussians) and no PDE time stepping is needed: a
monotonicity violation in the trace indicates a real bug, not solver drift.

The energy is the integral of B composed with the per-coordinate heat
extensions, u_j evolving with diffusivity sigma_j = <C a_j, a_j>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import quadrature
from .errors import DomainError, StructuralError, UnsupportedScaleError
from .model import BellmanSpec, GaussCert, VectorSystem
from .verifier import check_L3, sample_interior

QUAD_TOL = 1e-8
DEFAULT_TIMES = (0.0, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)
MAX_K = 3
_LOG_TAIL = 40.0  # cube tail below exp(-40) of the interior scale


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Box:
    """Indicator of [lo, hi] scaled to the given height."""

    lo: float
    hi: float
    height: float

    def __post_init__(self):
        if not (self.lo < self.hi and self.height > 0.0):
            raise StructuralError("box needs lo < hi and positive height")

    def mass(self) -> float:
        return self.height * (self.hi - self.lo)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return self.height * ((y >= self.lo) & (y <= self.hi)).astype(float)

    def heat(self, y, sigma: float, t: float):
        if t == 0.0:
            return self.value(y)
        y = np.asarray(y, dtype=float)
        w = math.sqrt(4.0 * sigma * t)
        return 0.5 * self.height * (erf((y - self.lo) / w) - erf((y - self.hi) / w))

    def heat_dy(self, y, sigma: float, t: float):
        if t == 0.0:
            raise DomainError("box data is not differentiable at t = 0")
        y = np.asarray(y, dtype=float)
        w = math.sqrt(4.0 * sigma * t)
        c = self.height / (w * math.sqrt(math.pi))
        return c * (np.exp(-((y - self.lo) / w) ** 2) - np.exp(-((y - self.hi) / w) ** 2))

    def domination(self) -> tuple[float, float]:
        m = max(abs(self.lo), abs(self.hi))
        return self.height * math.exp(m * m), 1.0

    def breakpoints(self) -> tuple[float, ...]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class GaussianProfile:
    """u(y) = amplitude * exp(-(y - center)^2 / variance)."""

    amplitude: float
    center: float
    variance: float

    def __post_init__(self):
        if not (self.amplitude > 0.0 and self.variance > 0.0):
            raise StructuralError("Gaussian needs positive amplitude and variance")

    def mass(self) -> float:
        return self.amplitude * math.sqrt(math.pi * self.variance)

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return self.amplitude * np.exp(-((y - self.center) ** 2) / self.variance)

    def heat(self, y, sigma: float, t: float):
        y = np.asarray(y, dtype=float)
        vt = self.variance + 4.0 * sigma * t
        amp = self.amplitude * math.sqrt(self.variance / vt)
        return amp * np.exp(-((y - self.center) ** 2) / vt)

    def heat_dy(self, y, sigma: float, t: float):
        y = np.asarray(y, dtype=float)
        vt = self.variance + 4.0 * sigma * t
        return -2.0 * (y - self.center) / vt * self.heat(y, sigma, t)

    def domination(self) -> tuple[float, float]:
        if self.center == 0.0:
            return self.amplitude, 1.0 / self.variance
        b = self.amplitude * math.exp(self.center**2 / self.variance)
        return b, 0.5 / self.variance

    def breakpoints(self) -> tuple[float, ...]:
        return ()


@dataclass(frozen=True)
class SumOfBoxes:
    boxes: tuple[Box, ...]

    def __post_init__(self):
        if not self.boxes:
            raise StructuralError("sum of boxes needs at least one box")
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def mass(self) -> float:
        return sum(b.mass() for b in self.boxes)

    def value(self, y):
        return sum(b.value(y) for b in self.boxes)

    def heat(self, y, sigma: float, t: float):
        return sum(b.heat(y, sigma, t) for b in self.boxes)

    def heat_dy(self, y, sigma: float, t: float):
        return sum(b.heat_dy(y, sigma, t) for b in self.boxes)

    def domination(self) -> tuple[float, float]:
        pairs = [b.domination() for b in self.boxes]
        return sum(b for b, _ in pairs), min(d for _, d in pairs)

    def breakpoints(self) -> tuple[float, ...]:
        return tuple(x for b in self.boxes for x in b.breakpoints())


Profile = Box | GaussianProfile | SumOfBoxes


def heat_extension(profile: Profile, sigma: float, y, t: float):
    """Closed-form heat extension u(y, t) with diffusivity sigma (t >= 0)."""
    if t < 0.0 or sigma <= 0.0:
        raise DomainError("need t >= 0 and sigma > 0")
    return profile.heat(y, sigma, t)


def evolved_domination(profile: Profile, sigma: float, t: float) -> tuple[float, float]:
    """Dominating pair (b_t, delta_t) for u(., t): the Gaussian bound
    u(y, t) <= b (1 + 4 t delta sigma)^{-1/2} exp(-delta y^2 / (1 + 4 t delta sigma))."""
    b, d = profile.domination()
    g = 1.0 + 4.0 * t * d * sigma
    return b / math.sqrt(g), d / g


def gaussian_extremizer(mass: float, sigma: float) -> GaussianProfile:
    """The equality-case profile b e^{-y^2/sigma} (pi sigma)^{-1/2} with
    integral ``mass``; its heat extension stays in the same family."""
    return GaussianProfile(amplitude=mass / math.sqrt(math.pi * sigma),
                           center=0.0, variance=sigma)


# ---------------------------------------------------------------------------
# energy


def _check_problem(sys: VectorSystem, B: BellmanSpec, profiles) -> None:
    if sys.k > MAX_K:
        raise UnsupportedScaleError(f"tensor quadrature capped at k <= {MAX_K}")
    if len(profiles) != sys.n or B.n != sys.n:
        raise StructuralError("need one profile per column and B of n variables")


def _energy_halfwidth(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                      profiles, t: float) -> float:
    """Cube half-width from the evolved domination bounds: the integrand is
    bounded by a Gaussian with quadratic form sum_j w_j delta_j(t) a_j a_j^T."""
    deltas = np.array([evolved_domination(p, s, t)[1]
                       for p, s in zip(profiles, cert.sigma)])
    F = (sys.A * (B.weights * deltas)) @ sys.A.T
    lam_min = float(np.linalg.eigvalsh(F)[0])
    if lam_min <= 0.0:
        raise StructuralError("degenerate decay form; is rank(A) = k?")
    return quadrature.gaussian_halfwidth(lam_min, log_tail=_LOG_TAIL)


def _profile_vector(sys, cert, profiles, X, t):
    """Stacked u_j(<a_j, x>, t) for an (m, k) batch of points -> (m, n)."""
    cols = [profiles[j].heat(X @ sys.A[:, j], cert.sigma[j], t)
            for j in range(sys.n)]
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class EnergyValue:
    value: float
    halfwidth: float
    levels: int
    exact_panels: bool  # breakpoint-aligned 1-D panels were used


def bellman_energy(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                   profiles, t: float, quad_tol: float = QUAD_TOL) -> EnergyValue:
    """Energy at time t by tensor quadrature with doubling refinement."""
    _check_problem(sys, B, profiles)
    L = _energy_halfwidth(sys, cert, B, profiles, t)

    def integrand(X):
        return B.evaluate(_profile_vector(sys, cert, profiles, X, t))

    discontinuous = t == 0.0 and any(p.breakpoints() for p in profiles)
    if sys.k == 1 and discontinuous:
        # box data at time zero: split the axis where <a_j, x> crosses an
        # edge; on each panel the box factors are constant, so the panel
        # rule is exact for pure box data and fast otherwise
        cuts = [edge / a for j, a in enumerate(sys.A[0]) if a != 0.0
                for edge in profiles[j].breakpoints()]
        res = quadrature.panel_quad_1d(lambda x: integrand(x.reshape(-1, 1)),
                                       cuts, L, rel_tol=quad_tol)
        return EnergyValue(res.value, L, res.levels, True)
    if discontinuous:
        raise UnsupportedScaleError(
            "box initial data at t = 0 is only integrated exactly for k = 1; "
            "evaluate at t > 0 or use Gaussian profiles")
    res = quadrature.tensor_quad_strict(integrand, sys.k, L, rel_tol=quad_tol, n0=16)
    return EnergyValue(res.value, L, res.levels, False)


def rhs_limit(sys: VectorSystem, cert: GaussCert, B: BellmanSpec, masses,
              quad_tol: float = QUAD_TOL) -> EnergyValue:
    """The t -> infinity limit: B of normalized Gaussians scaled by the masses.

    The catalog functions are monomials, so the limit also has a closed
    Gaussian form; quadrature is cross-checked against it before the value
    is returned.
    """
    masses = np.asarray(masses, dtype=float).ravel()
    if masses.size != sys.n or np.any(masses <= 0.0):
        raise StructuralError("need one positive mass per column")
    if sys.k > MAX_K:
        raise UnsupportedScaleError(f"tensor quadrature capped at k <= {MAX_K}")
    amp = masses / np.sqrt(math.pi * cert.sigma)

    def integrand(X):
        proj = X @ sys.A
        return B.evaluate(amp * np.exp(-(proj**2) / cert.sigma))

    F = (sys.A * (B.weights / cert.sigma)) @ sys.A.T
    lam = np.linalg.eigvalsh(F)
    L = quadrature.gaussian_halfwidth(float(lam[0]), log_tail=_LOG_TAIL)
    res = quadrature.tensor_quad_strict(integrand, sys.k, L, rel_tol=quad_tol, n0=16)
    closed = (B.coeff * float(np.prod(amp**B.weights))
              * math.pi ** (sys.k / 2.0) / math.sqrt(float(np.prod(lam))))
    if abs(res.value - closed) > 1e-6 * abs(closed):
        raise StructuralError(
            f"limit self-test failed: quadrature {res.value!r} vs closed form {closed!r}")
    return EnergyValue(res.value, L, res.levels, False)


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    values: np.ndarray
    halfwidths: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if np.any(np.diff(t) <= 0.0):
            raise StructuralError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise StructuralError("trace values must be finite")


@dataclass(frozen=True)
class FlowVerdict:
    monotone: bool
    certified: bool | None  # None when the concavity check was skipped
    mono_tol: float
    initial_value: float
    limit_value: float
    final_gap: float  # |last trace value - t->infinity limit|
    label: str


def monotonicity_scan(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                      profiles, times=DEFAULT_TIMES, quad_tol: float = QUAD_TOL,
                      check_certificate: bool = True,
                      l3_samples: int = 200) -> tuple[EnergyTrace, FlowVerdict]:
    """Sample the energy over a time grid and check it never decreases.

    When the certificate fails (or is not checked) the verdict is labeled
    accordingly: monotonicity is only guaranteed under the concavity
    condition.
    """
    _check_problem(sys, B, profiles)
    times = np.asarray(sorted(set(float(t) for t in times)))
    evals = [bellman_energy(sys, cert, B, profiles, t, quad_tol=quad_tol)
             for t in times]
    values = np.array([ev.value for ev in evals])
    trace = EnergyTrace(times=times, values=values,
                        halfwidths=np.array([ev.halfwidth for ev in evals]),
                        levels=np.array([ev.levels for ev in evals]))
    mono_tol = max(1e-8, 10.0 * quad_tol * float(np.max(np.abs(values))))
    monotone = bool(np.all(np.diff(values) >= -mono_tol))
    certified = None
    if check_certificate:
        samples = sample_interior(B.n, count=l3_samples, seed=0)
        certified = check_L3(sys, cert, B, samples).ok
    limit = rhs_limit(sys, cert, B, [p.mass() for p in profiles], quad_tol=quad_tol)
    label = ("certified" if certified else
             "no certificate" if certified is False else "unchecked")
    verdict = FlowVerdict(monotone=monotone, certified=certified, mono_tol=mono_tol,
                          initial_value=float(values[0]), limit_value=limit.value,
                          final_gap=abs(float(values[-1]) - limit.value), label=label)
    return trace, verdict


# ---------------------------------------------------------------------------
# pointwise identity probe


def bellman_identity_probe(sys: VectorSystem, cert: GaussCert, B: BellmanSpec,
                           profiles, t: float, x, h_x: float = 1e-4,
                           h_t: float | None = None) -> tuple[float, float, float]:
    """Finite-difference check of the pointwise evolution identity.

    Left side: (d/dt - sum c_ij d^2/dx_i dx_j) B(u(x, t)) by central
    differences on the analytic heat extensions.  Right side (analytic):
    -<(A^T C A) o Hess B(u) u', u'>.  Returns (defect, lhs, rhs).
    """
    _check_problem(sys, B, profiles)
    x = np.asarray(x, dtype=float).ravel()
    if h_t is None:
        h_t = 1e-5 * max(t, 1.0)
    if t < 10.0 * h_t:
        raise DomainError("probe requires t >= 10 * h_t")

    def F(pt, tt):
        u = _profile_vector(sys, cert, profiles, pt.reshape(1, -1), tt)
        return float(B.evaluate(u[0]))

    lhs = (F(x, t + h_t) - F(x, t - h_t)) / (2.0 * h_t)
    C = cert.C
    f0 = F(x, t)
    for i in range(sys.k):
        ei = np.zeros(sys.k)
        ei[i] = h_x
        lhs -= C[i, i] * (F(x + ei, t) - 2.0 * f0 + F(x - ei, t)) / h_x**2
        for j in range(i + 1, sys.k):
            ej = np.zeros(sys.k)
            ej[j] = h_x
            mixed = (F(x + ei + ej, t) - F(x + ei - ej, t)
                     - F(x - ei + ej, t) + F(x - ei - ej, t)) / (4.0 * h_x**2)
            lhs -= 2.0 * C[i, j] * mixed

    y = np.array([profiles[j].heat(float(sys.A[:, j] @ x), cert.sigma[j], t)
                  for j in range(sys.n)])
    du = np.array([profiles[j].heat_dy(float(sys.A[:, j] @ x), cert.sigma[j], t)
                   for j in range(sys.n)])
    G = sys.A.T @ C @ sys.A
    H = G * B.hessian(y)
    rhs = -float(du @ H @ du)
    return abs(lhs - rhs), lhs, rhs
