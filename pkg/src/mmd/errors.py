"""Exception hierarchy shared by every module."""


class MMDError(ValueError):
    """Base class for all errors raised by :mod:`mmd`."""


class InvalidPresentation(MMDError):
    pass


class DomainError(MMDError):
    """An argument lies outside the domain of an operation."""


class DimensionError(MMDError):
    pass


class RepresentationError(MMDError):
    """Matrices do not form a unitary representation of the group."""


class SpectralMismatch(MMDError):
    pass


class ContainmentError(MMDError):
    pass


class ToleranceError(MMDError):
    """A numerical post-check failed; usually an ill-conditioned input."""


class ConditioningError(MMDError):
    """Posterior requested for an outcome set of (near) zero probability."""


class InvalidPOVM(MMDError):
    pass


class ShapeError(MMDError):
    pass


class DimensionCapExceeded(MMDError):
    pass


class EquivalenceError(MMDError):
    pass


class PreconditionError(MMDError):
    pass
