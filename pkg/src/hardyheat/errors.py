"""Exception hierarchy shared across the package."""


class HardyHeatError(Exception):
    """Base class for all package-specific errors."""


class LambdaBelowCritical(HardyHeatError):
    """Inverse-square coefficient below -(N-2)^2/4: operator unbounded below."""


class NotAdmissible(HardyHeatError):
    """Lorentz index tuple outside the admissible set."""


class ValidationFailure(HardyHeatError):
    """A potential failed a sampled envelope check."""

    def __init__(self, clause, radius, message):
        super().__init__(f"{clause} violated near r={radius:g}: {message}")
        self.clause = clause
        self.radius = radius


class NotNonnegative(HardyHeatError):
    """The quadratic form of the operator went negative on a trial function."""


class EnvelopeViolation(HardyHeatError):
    """Input function violates the envelope required by the integral operator."""


class QuadratureFailure(HardyHeatError):
    """Nested quadrature could not reach the requested tolerance."""


class ContractionFailure(HardyHeatError):
    """No small-radius cap gives a contracting fixed-point iteration."""


class ODEFailure(HardyHeatError):
    """Outward continuation of the profile ODE broke down."""


class AsymptoticNotReached(HardyHeatError):
    """Large-r asymptotic regime not reached within the sampled range."""


class UnsupportedMode(HardyHeatError):
    """Angular mode outside the implemented set (k=0 any N; k=1 for N=3)."""


class StabilityFailure(HardyHeatError):
    """Implicit time step could not be completed."""


class SupportEscape(HardyHeatError):
    """Too much mass left through the absorbing outer boundary."""


class PositivityViolation(HardyHeatError):
    """Sampled heat kernel went significantly negative (discretization bug)."""


class AccuracyWarning(UserWarning):
    """High-order discrete time derivatives amplify noise."""
