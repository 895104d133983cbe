"""Exception types shared across the package."""


class SphmaxError(Exception):
    """Base class for all package-specific errors."""


class InvalidDimensionError(SphmaxError):
    """Ambient dimension outside the supported range."""


class DomainError(SphmaxError):
    """Argument outside the mathematical domain of an operation."""


class UndefinedExponentError(SphmaxError):
    """A derived exponent does not exist for the given inputs."""


class ExponentOrderError(SphmaxError):
    """Exponent parameters violate a required ordering constraint."""


class BoundaryError(SphmaxError):
    """Inputs sit on a boundary where the quantity degenerates."""


class GeometryError(SphmaxError):
    """Grid/cube geometry is inconsistent (misaligned, out of range, ...)."""


class ResolutionError(SphmaxError):
    """Requested feature is too fine for the chosen discretization."""
