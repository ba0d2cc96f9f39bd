"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid geometric input: wrong manifold, non-finite coordinates,
    broken point/tangent invariants."""


class AntipodalError(GeometryError):
    """Logarithm or transport requested at or beyond the injectivity radius,
    where the minimizing geodesic is not unique."""


class DomainError(ValueError):
    """Point outside the domain ball of a vector-field problem, or scalar
    argument outside the domain of a majorant function."""


class SingularOperatorError(ValueError):
    """Tangent-space linear operator is numerically singular."""


class InvalidQueryError(ValueError):
    """Radius query with an inadmissible tolerance budget (budget * spreading >= 1)."""


class InsufficientDataError(ValueError):
    """Not enough usable iteration records to estimate a convergence order."""


class ConfigError(ValueError):
    """Malformed experiment configuration (unknown keys, bad values)."""
