"""Exception types shared across the package.

Plain argument problems raise :class:`ValueError`; the classes below cover the
cases where a caller may want to react to something more specific.
"""


class InvariantViolation(ValueError):
    """A quantity that must be strictly positive (a cost, a ratio) is not."""


class NearUnityContraction(ArithmeticError):
    """The contraction estimate is so close to 1 that the settling-time
    sensitivity is numerically singular."""


class NonFiniteError(FloatingPointError):
    """A cost or gradient evaluation produced inf or nan."""


class ConvergenceError(RuntimeError):
    """Iteration limit reached before the fixed-point residual met tolerance."""

    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


class ScenarioAborted(RuntimeError):
    """A closed-loop run failed part way; ``trace`` holds what completed."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace
