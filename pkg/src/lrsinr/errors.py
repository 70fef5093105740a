"""Exception hierarchy.

Two families: :class:`RegimeError` for invalid inputs or parameter regimes
(CLI exit code 2) and :class:`NumericalError` for linear-algebra failures
(CLI exit code 3).
"""


class LrsinrError(Exception):
    """Base class for all package errors."""


class RegimeError(LrsinrError, ValueError):
    """Invalid argument, configuration or asymptotic regime."""


class NumericalError(LrsinrError, ArithmeticError):
    """A numerical routine failed or its preconditions were violated."""


class DimensionMismatch(RegimeError):
    pass


class InvalidArgument(RegimeError):
    pass


class IndexOutOfRange(RegimeError, IndexError):
    pass


class RankTooLarge(RegimeError):
    pass


class InvalidRegime(RegimeError):
    pass


class DegenerateJammers(RegimeError):
    pass


class DegenerateSteering(RegimeError):
    pass


class SeparationViolated(RegimeError):
    """Raised when some spikes do not satisfy ``omega_i > sqrt(c)``."""

    def __init__(self, indices, message=None):
        self.indices = tuple(int(i) for i in indices)
        if message is None:
            message = f"separation condition violated for spike indices {list(self.indices)}"
        super().__init__(message)


class ValidationError(RegimeError):
    """Configuration field failed validation; ``field`` names it."""

    def __init__(self, field, message=None):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class ParseError(RegimeError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class NotHermitian(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class Singular(NumericalError):
    pass


class AdaptiveFilterUnavailable(Singular):
    pass
