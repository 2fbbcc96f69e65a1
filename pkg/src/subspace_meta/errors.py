"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes or ranks of the inputs are incompatible."""


class InvariantError(ValueError):
    """A structural invariant (orthonormality, symmetry, ...) is violated."""


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be SPD failed its factorization."""


class DegenerateError(RuntimeError):
    """A conditional or estimate is degenerate (ties, zero mass, ...)."""


class MassUnderflowError(DegenerateError):
    """A truncated distribution has no representable mass on the region."""


class ModeError(ValueError):
    """An operation was called on data in the wrong handling mode."""


class NumericFailureError(RuntimeError):
    """The sampler reached a non-finite state.

    Carries the sweep index at which the failure was detected.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class ConfigError(ValueError):
    """An experiment configuration is missing or inconsistent."""
