"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A numeric or enumerated argument is outside its admissible range."""


class DegenerateGeometryError(ValueError):
    """Two points that must be distinct coincide (e.g. a UE placed on a site)."""


class OutOfDomainError(ValueError):
    """An analytical expression is evaluated outside its domain of validity."""
