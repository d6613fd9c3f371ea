"""Exception types shared across the package."""


class OrliczLabError(Exception):
    pass


class InvalidParameterError(OrliczLabError, ValueError):
    pass


class DimensionMismatchError(OrliczLabError, ValueError):
    pass


class NotFoundError(OrliczLabError, KeyError):
    pass


class InvalidComplexError(OrliczLabError, ValueError):
    pass


class InvalidDegreeError(OrliczLabError, ValueError):
    pass


class UnsupportedDimensionError(OrliczLabError, ValueError):
    pass


class NotACocycleError(OrliczLabError, ValueError):
    """Raised when a Cech 0-cochain of forms disagrees on overlaps."""


class NotInKernelError(OrliczLabError, ValueError):
    """Raised when a component expected to be constant is not."""


class NumericalBreakdownError(OrliczLabError, RuntimeError):
    def __init__(self, message, step=None, residual=None):
        super().__init__(message)
        self.step = step
        self.residual = residual


class SpecError(OrliczLabError, ValueError):
    """Unparseable Young-function or mesh descriptor string."""
