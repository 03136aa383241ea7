"""Exception types shared across the package."""


class StrataError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(StrataError, ValueError):
    """Invalid geometric configuration (dimensions, axis sets)."""


class ChainMismatch(StrataError, ValueError):
    """Adjacent atoms of a word do not chain as maps between manifolds."""


class OrderViolation(StrataError, ValueError):
    """A Sobolev order precondition fails, or endpoint spaces disagree."""


class NotFusible(StrataError, ValueError):
    """No boundary/psdo/coboundary pattern eligible for trace fusion."""


class AxisMismatch(StrataError, ValueError):
    """An expression or grid references axes outside its manifold."""


class StratumMismatch(StrataError, ValueError):
    """A symbol was requested on a stratum where it is not defined."""


class ShapeMismatch(StrataError, ValueError):
    """Operator-symbol spaces do not match for composition."""


class TailMass(StrataError, ValueError):
    """A sampled function leaks more than the allowed mass out of the box."""


class DegenerateFit(StrataError, ValueError):
    """Slope fitting impossible: norms underflow or are partially zero."""


class DslError(StrataError, ValueError):
    """Problem with a DSL program."""


class ParseError(DslError):
    """Syntax error, carries line/column information."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            where = f" (line {line}, col {column})"
        elif line is not None:
            where = f" (line {line})"
        else:
            where = ""
        super().__init__(f"{message}{where}")


class ValidationError(DslError):
    """A parsed program violates word/morphism preconditions."""
