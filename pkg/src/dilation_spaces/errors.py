"""Exception hierarchy shared by every module."""


class DilationSpacesError(Exception):
    """Base class; ``code`` is the machine-readable tag used by the CLI."""

    code = "error"


class InvalidArgument(DilationSpacesError, ValueError):
    code = "invalid-argument"


class DivisionByZero(DilationSpacesError, ZeroDivisionError):
    code = "division-by-zero"


class PrecisionExhausted(DilationSpacesError, ArithmeticError):
    """A valuation or digit is not determined by the stored coefficients."""

    code = "precision-exhausted"


class DepthExhausted(DilationSpacesError, ValueError):
    """Two truncated addresses agree on every stored entry."""

    code = "depth-exhausted"


class InvariantViolation(DilationSpacesError, ValueError):
    code = "invariant-violation"


class InvalidDilation(DilationSpacesError, ValueError):
    code = "invalid-dilation"


class DomainError(DilationSpacesError, KeyError):
    code = "domain-error"

    def __str__(self):
        return Exception.__str__(self)


class ClassificationFailed(DilationSpacesError, RuntimeError):
    code = "classification-failed"

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
