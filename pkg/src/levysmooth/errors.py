"""Exception hierarchy shared by all levysmooth modules."""


class LevysmoothError(Exception):
    """Base class for all package errors."""


class DescriptorInvalidError(LevysmoothError):
    """Symbol parameters violate their admissible domain."""


class OriginSingularityError(LevysmoothError):
    """Derivative requested at (or too close to) an origin singularity."""


class UnsupportedOrderError(LevysmoothError):
    """Derivative order beyond the configured maximum."""


class IntegrationFailureError(LevysmoothError):
    """Adaptive quadrature did not converge. Carries the residual estimate."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class HypothesisViolationError(LevysmoothError):
    """Coefficient field fails the boundedness/ellipticity requirements."""


class NearPoleError(LevysmoothError):
    """Quotient symbol evaluated too close to a pole of the resolvent."""


class NearSpectrumError(LevysmoothError):
    """Resolvent parameter within the safety margin of the symbol range."""


class InstabilityError(LevysmoothError):
    """Semigroup multiplier has a growth mode (negative real part)."""


class QuadratureConvergenceError(LevysmoothError):
    """Contour quadrature failed its node-doubling test. Carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class EvaluationError(LevysmoothError):
    """Symbol evaluation produced a non-finite value. Names the frequency."""


class CostGuardError(LevysmoothError):
    """Dense operator application refused above the configured size ceiling."""


class ConfigError(LevysmoothError):
    """Invalid run configuration. Names the offending key."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
