"""Exception types raised across the package."""


class ExcitableError(Exception):
    """Base class for all errors raised by this package."""


class NumericalBlowup(ExcitableError):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite field value produced at step {step}")


class VoidStimulus(ExcitableError):
    """Stimulus square contains no excitable node."""


class GeometryOverflow(ExcitableError):
    """A generated channel would leave the grid."""


class ParseError(ExcitableError):
    """Malformed Netpbm header or payload."""


class EmptyMask(ExcitableError):
    """A mask with no excitable node."""


class ZeroStreets(ExcitableError):
    """Coverage requested on a mask with no excitable node."""


class Inconclusive(ExcitableError):
    """Wave classification could not be completed inside the field."""


class BadBracket(ExcitableError):
    """Bisection endpoints do not carry the expected wave classes."""


class DegenerateInput(ExcitableError):
    """Regression input with no spread in the abscissa."""


class ConfigError(ExcitableError, ValueError):
    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field `{field}`")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
