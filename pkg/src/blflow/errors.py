"""Exception types shared across the package."""


class BLFlowError(Exception):
    """Base class for all package errors."""


class StructuralError(BLFlowError, ValueError):
    """Input violates a structural invariant (shape, rank, symmetry)."""


class DomainError(BLFlowError, ValueError):
    """Point outside the domain of an operation (e.g. boundary of the orthant)."""


class EvaluationError(BLFlowError, ArithmeticError):
    """Objective or matrix evaluation failed (singular / indefinite form)."""


class IterationError(BLFlowError, RuntimeError):
    """An iterative solver hit a state it cannot continue from."""


class CertificateRejection(BLFlowError, ValueError):
    """A candidate certificate violates a positivity requirement."""


class UnsupportedScaleError(BLFlowError, ValueError):
    """Problem size exceeds what the quadrature backend supports."""


class QuadratureAnomaly(BLFlowError, RuntimeError):
    """Refinement did not behave as expected (non-convergent or non-monotone)."""
