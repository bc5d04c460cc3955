"""Exception types shared across the package."""


class ChernLabError(Exception):
    """Base class for all errors raised by chernlab."""


class ParseError(ChernLabError):
    """Malformed expression source; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int, source: str = ""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class SingularityError(ChernLabError, ArithmeticError):
    """Division by zero or log of zero during evaluation."""

    def __init__(self, message: str, subtree=None):
        self.subtree = subtree
        detail = f" in {subtree}" if subtree is not None else ""
        super().__init__(message + detail)


class MetricError(ChernLabError, ValueError):
    """A metric fails validation (not Hermitian, not positive definite)."""

    def __init__(self, message: str, point=None):
        self.point = point
        super().__init__(message if point is None else f"{message} at z={list(point)}")


class JetOrderError(ChernLabError, ValueError):
    """A computation needs more derivatives than the supplied jet carries."""


class ConfigError(ChernLabError, ValueError):
    """A metric configuration file violates the schema."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(message + (f" ({', '.join(where)})" if where else ""))


class NotBalancedError(ChernLabError, ValueError):
    """Frame normalization was requested for torsion with non-vanishing eta."""


class FrameNotNormalizedError(ChernLabError, ValueError):
    """A frame was expected to be in normal form but a component is nonzero."""

    def __init__(self, message: str, component=None, value=None):
        self.component = component
        self.value = value
        super().__init__(message)


class MissingDataError(ChernLabError, ValueError):
    """An identity needs covariant derivatives that were not computed."""
