"""Exception types shared across the package."""


class SpinClusterError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpinError(SpinClusterError):
    """Spin magnitude is not a positive half-integer."""


class DimensionCapError(SpinClusterError):
    """Requested Hilbert space exceeds the configured dimension cap."""


class EmbeddingError(SpinClusterError):
    """Site index out of range or operator shape does not match the site."""


class ShapeError(SpinClusterError):
    """Array argument has the wrong shape."""


class PoleError(SpinClusterError):
    """Evaluation point too close to a pole of a rational expression."""


class LaxConstraintError(SpinClusterError):
    """Site coefficients violate the alpha*beta = gamma*rho constraint."""


class ConstraintError(SpinClusterError):
    """Model parameters violate a structural constraint."""


class InternalConsistencyError(SpinClusterError):
    """Cross-check between two internal computation routes failed."""


class OffShellError(SpinClusterError):
    """Rapidities do not satisfy the Bethe equations to the required accuracy."""


class HermiticityError(SpinClusterError):
    """Matrix expected to be Hermitian is not, or an energy came out complex."""


class NotBlockDiagonalError(SpinClusterError):
    """Operator does not commute with the conserved quantity used for blocking."""


class ConfigError(SpinClusterError):
    """Run configuration file is malformed or violates an invariant."""
