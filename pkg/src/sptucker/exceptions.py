"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand dimensions are inconsistent."""


class BoundsError(IndexError):
    """A coordinate falls outside the declared tensor shape."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class RankError(ValueError):
    """Requested rank exceeds what the operand can provide."""


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its sweep cap before converging."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NumericalError(FloatingPointError):
    """A non-finite quantity appeared during the decomposition."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class TnsParseError(ValueError):
    """Malformed line in a ``.tns`` file."""

    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class FormatError(ValueError):
    """File header or magic number is inconsistent or unsupported."""
