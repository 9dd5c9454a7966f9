"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """Parameters or inputs violate a documented precondition.

    The CLI maps this to exit code 2 (configuration error).
    """


class NumericsError(RuntimeError):
    """A numerical invariant (norm, trace, positivity, convergence) failed.

    The CLI maps this to exit code 3.
    """
