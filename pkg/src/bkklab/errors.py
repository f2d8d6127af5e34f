"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Malformed or out-of-range input."""


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


class InvalidBody(ValueError):
    """A support function does not describe a convex body."""


class NonConvergence(RuntimeError):
    """A refinement loop stopped before reaching its tolerance.

    Attributes
    ----------
    residual : float
        The last residual or change observed.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class UnsupportedMode(ValueError):
    """The requested pipeline is outside what the sampler can do unsigned."""
