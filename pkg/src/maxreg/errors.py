"""Exception hierarchy.

Errors deriving from :class:`MathematicalFailure` signal that a hypothesis of
the underlying theory is violated by the data (the CLI maps them to exit 2);
everything else is a usage or wiring problem.
"""


class MaxRegError(Exception):
    pass


class MathematicalFailure(MaxRegError):
    pass


# triple
class NotHermitian(MaxRegError):
    pass


class NotPositiveDefinite(MaxRegError):
    pass


class DimensionMismatch(MaxRegError):
    pass


class OutOfRange(MaxRegError):
    pass


# form / sectorial
class NonCoercive(MathematicalFailure):
    pass


class SingularResolvent(MaxRegError):
    pass


class QuadratureNotConverged(MathematicalFailure):
    pass


class NotStable(MathematicalFailure):
    pass


class TripleMismatch(MaxRegError):
    pass


# solver
class SingularSystem(MaxRegError):
    pass


class NotContracting(MathematicalFailure):
    pass


class MaxIterExceeded(MathematicalFailure):
    pass


# robin / nonlinear
class InvalidHolder(MaxRegError):
    pass


class BoundaryZero(MaxRegError):
    pass


class NotConverged(MathematicalFailure):
    pass


# config
class ConfigError(MaxRegError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ConfigError):
    pass


class InvalidValue(ConfigError):
    pass
