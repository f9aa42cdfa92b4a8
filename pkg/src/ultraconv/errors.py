"""Exception hierarchy.

Everything raised on bad mathematical input derives from ``DomainError`` so the
CLI can map it to exit status 1; ``UsageError`` (and ``ParseError``) map to 2.
"""


class DomainError(Exception):
    """Input is well-formed but mathematically unusable."""

    code = "domain"


class InvalidSequenceError(DomainError):
    code = "invalid-sequence"


class ConstructionError(DomainError):
    """An ultrapolynomial or kernel cannot be built with the given parameters."""

    code = "construction"


class TruncationError(DomainError):
    """A request falls outside the certified truncation (box, xi-budget, grid)."""

    code = "truncation"


class ConvergenceError(DomainError):
    code = "convergence"


class ConsistencyError(DomainError):
    """Two independent numerical routes disagree beyond their tolerance."""

    code = "consistency"


class NonConvolvablePairError(DomainError):
    code = "non-convolvable-pair"


class DivergenceError(DomainError):
    code = "divergence"


class UsageError(Exception):
    code = "usage"


class ParseError(UsageError):
    """Syntax error in a function expression, positioned at (line, column)."""

    def __init__(self, code, message, line, column, expected=()):
        self.code = code
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        where = f"line {line}, column {column}"
        extra = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{code}: {message} at {where}{extra}")
