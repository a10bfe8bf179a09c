"""Exception hierarchy shared across the package."""


class VDError(Exception):
    """Base class for all errors raised by vdistill."""


class DimensionError(VDError, ValueError):
    """Width or shape mismatch between a circuit, state or operator."""


class NumericError(VDError, ValueError):
    """Non-finite or otherwise unusable floating point input."""


class DomainError(VDError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(VDError, ValueError):
    """Problem is larger than the dense backend is willing to handle."""


class InputError(VDError, ValueError):
    """Malformed or missing input (bad parameter count, missing plan, ...)."""


class CoverageError(VDError):
    """A reconstruction needs a projection that was never measured."""


class DegeneratePurityError(VDError, ArithmeticError):
    """The purity estimate is too close to zero to divide by."""
