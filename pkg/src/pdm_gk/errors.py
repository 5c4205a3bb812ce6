"""Exception types shared across the package."""


class NonConvergenceError(ArithmeticError):
    """A series or quadrature did not reach its tolerance within its cap."""


class TruncationError(ArithmeticError):
    """A truncated expansion leaves more tail mass than allowed."""


class IncompatibleMomentsError(ValueError):
    """Two coherent states were built from different moment sequences."""
