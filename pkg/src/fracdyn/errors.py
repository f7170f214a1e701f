"""Exception types shared across the package."""


class FracDomainError(ValueError):
    """An argument is outside the documented domain of an operator."""


class IntegerOrderError(FracDomainError):
    """A fractional operator received an integer order.

    Integer orders are handled by classical differentiation; callers should
    route to numpy.gradient or analytic derivatives instead.
    """


class GridMismatchError(FracDomainError):
    """Two sampled series do not share the same grid."""


class UnsupportedOrderError(FracDomainError):
    """The causal history scheme only supports orders in (0, 1) or (1, 2)."""


class SingularPointError(FracDomainError):
    """A closed-form expression was requested at a point where it diverges."""


class SingularConstraintError(RuntimeError):
    """The Chetaev gradient (or A^2) vanished; the multiplier is undefined."""


class ConstraintViolationError(ValueError):
    """Initial data does not satisfy the constraint equation."""


class AccuracyLossError(RuntimeError):
    """A special-function or quadrature routine could not reach its target.

    The ``achieved`` attribute carries the best error bound obtained.
    """

    def __init__(self, message: str, achieved: float = float("nan")):
        super().__init__(message)
        self.achieved = achieved


class DivergenceError(RuntimeError):
    """Time integration blew up; ``partial`` holds the result so far."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(ValueError):
    """A scenario configuration failed validation; names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key
