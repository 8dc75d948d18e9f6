"""Exception hierarchy shared by all modules."""


class FreeConvError(Exception):
    """Base class; ``code`` is a short machine-readable tag."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class MeasureError(FreeConvError, ValueError):
    """A measure violates one or more invariants."""

    code = "invalid-measure"

    def __init__(self, violations, message=None):
        self.violations = list(violations)
        if message is None:
            message = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        super().__init__(message)


class SpecSyntaxError(FreeConvError, ValueError):
    code = "syntax-error"

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DomainError(FreeConvError, ValueError):
    """A transform was evaluated outside its domain."""

    code = "domain-error"


class EtaPoleError(DomainError):
    code = "eta-pole"


class UnsupportedInputError(FreeConvError, ValueError):
    code = "unsupported-input"


class CarrierMismatchError(FreeConvError, ValueError):
    code = "carrier-mismatch"
