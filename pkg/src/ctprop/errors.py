"""Exception types shared across the package."""


class CtpropError(Exception):
    """Base class for all errors raised by this package."""


class ModelInconsistencyError(CtpropError):
    """Two model fragments disagree (variable identity clash, duplicate table)."""


class EvidenceError(CtpropError):
    """Evidence refers to an unknown variable or state."""


class ZeroEvidenceError(CtpropError):
    """The observed evidence has probability zero under the model."""

    def __init__(self, message: str, evidence: dict | None = None):
        super().__init__(message)
        self.evidence = evidence or {}


class InvalidSeparatorError(CtpropError):
    """A vertex set offered as a separator is not complete or does not split the graph."""


class StateSpaceTooLargeError(CtpropError):
    """A direct computation would exceed the configured cell cap."""


class InternalInvariantError(CtpropError):
    """An invariant the algorithm relies on failed; indicates a bug, not bad input."""


class ParseError(CtpropError):
    """A model file could not be parsed; carries line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
