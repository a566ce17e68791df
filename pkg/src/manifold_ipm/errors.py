"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A numeric parameter violates an operation precondition."""


class ResolutionError(ValueError):
    """Quadrature node count too small to resolve the oscillation frequency."""


class SingularProjectionError(ValueError):
    """Radial projection requested for a point at (or too near) the origin."""


class MassMismatchError(ValueError):
    """Two measures compared by optimal transport carry different total mass."""


class IncompatibleFieldsError(ValueError):
    """Coefficient fields differ in dimension or truncation level."""


class DegenerateDataError(ValueError):
    """Regression input contains non-positive distances or too few rows."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConfigError(ValueError):
    """Run configuration could not be parsed or failed validation."""
