"""Exception hierarchy shared by every module."""


class QBettingError(Exception):
    """Base class for all package errors."""


class InputError(QBettingError, ValueError):
    """Invalid user input (bad shapes, non-normalized PMFs, non-PSD matrices)."""


class DivergentEntropy(InputError):
    """A negative-order entropy met a zero probability on its support."""


class DivergentValue(InputError):
    """A divergence is infinite for the given arguments."""


class AlphabetMismatch(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class UndefinedAtZero(InputError):
    """Isoelastic utility evaluated at zero wealth where it has no finite value."""


class ZeroPayoffAtNegativePower(InputError):
    """A zero payoff on the support raised to a negative power (strict mode only)."""


class DegenerateDistribution(InputError):
    pass


class EmptyFreeSet(InputError):
    pass


class OptimizerDidNotConverge(QBettingError, RuntimeError):
    """Raised with the best iterate found so far attached as ``best``."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class MinimaxGapExceeded(OptimizerDidNotConverge):
    def __init__(self, message, min_max=None, max_min=None):
        super().__init__(message, best=(min_max, max_min))
        self.min_max = min_max
        self.max_min = max_min
