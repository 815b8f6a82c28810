"""Exception and warning types shared across the package.

Every error raised by levysid derives from :class:`LevysidError`, so callers can
catch one base class. The CLI maps subtrees of this hierarchy onto exit codes
(see ``levysid.cli``).
"""


class LevysidError(Exception):
    """Base class for all levysid errors."""


class DomainError(LevysidError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ExpressionError(LevysidError, ValueError):
    """Base class for expression-language errors.

    Carries ``offset``, the byte offset into the source text where the
    problem was detected (or None when not applicable).
    """

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class ExpressionSyntaxError(ExpressionError):
    """Malformed expression text. ``expected`` is the set of acceptable tokens."""

    def __init__(self, message, offset, expected=()):
        super().__init__(message, offset)
        self.expected = frozenset(expected)


class UnknownVariableError(ExpressionError):
    """Variable index exceeds the declared model dimension."""


class UnknownFunctionError(ExpressionError):
    """Function name is not one of the supported callables."""


class EvaluationDomainError(LevysidError, ArithmeticError):
    """Runtime arithmetic fault: division by zero, even root of a negative,
    log of a non-positive, or a NaN produced by an otherwise legal operation."""


class GridSizeError(LevysidError, ValueError):
    """Requested tensor grid exceeds the configured row cap."""


class SimulationError(LevysidError):
    """An Euler step failed; ``row`` and ``component`` locate the failure."""

    def __init__(self, message, row=None, component=None):
        super().__init__(message)
        self.row = row
        self.component = component


class InsufficientDataError(LevysidError):
    """Too few samples to run an estimator (empty bins, empty cube, M < K)."""


class NumericError(LevysidError):
    """Base class for dense linear-algebra failures."""


class RankDeficiencyError(NumericError):
    """No stable least-squares solution; carries the condition estimate."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class NonSymmetricError(NumericError):
    """Matrix handed to a symmetric routine is not symmetric."""


class NotPositiveSemidefiniteError(NumericError):
    """Eigenvalue below -tolerance during a PSD factorization."""


class ConfigError(LevysidError, ValueError):
    """Invalid configuration document; ``field`` is the offending field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DataFormatError(LevysidError, ValueError):
    """Dataset or report file violates its documented format."""


class EstimationWarning(UserWarning):
    """Non-fatal estimator conditions: clamped parameters, skipped empty bins."""


class ConditioningWarning(UserWarning):
    """Normal equations near-singular; a fallback path was taken."""
