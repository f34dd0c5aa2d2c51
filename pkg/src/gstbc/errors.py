"""Exception types raised by the library."""


class GstbcError(Exception):
    """Base class for all library errors."""


class InvalidDimensions(GstbcError, ValueError):
    """Array shapes are inconsistent or outside the supported range."""


class NonPositiveAlpha(GstbcError, ValueError):
    """The MMSE regularizer alpha = sigma_n^2 / sigma_s^2 must be > 0."""


class OddBitCount(GstbcError, ValueError):
    """QPSK maps bit pairs; the bit vector length must be even."""


class StructureViolation(GstbcError, ValueError):
    """A dense matrix does not carry the required 2x2 block structure."""


class SingularPivot(GstbcError, ArithmeticError):
    """A recursion pivot is non-positive, non-real, or numerically zero."""


class ParseError(GstbcError, ValueError):
    """Malformed text input; carries 1-based line and token positions."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", token {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ConfigInvalid(GstbcError, ValueError):
    """A simulation configuration fails validation."""
