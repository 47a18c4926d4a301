"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class InputError(ValueError):
    """Malformed or out-of-hypothesis input (exit code 2)."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class UnsupportedRange(InputError):
    """A method was asked to run outside the range it is proved for."""


class DomainError(InputError):
    """The requested quantity is undefined, e.g. a reciprocal of zero."""


class PreconditionError(InputError):
    """A lemma's hypothesis gate failed; carries the computed threshold."""


class UndecidedError(ArithmeticError):
    """A certified decision could not be made below the precision cap (exit code 1)."""

    def __init__(self, message, cap_bits=None, **details):
        super().__init__(message)
        self.cap_bits = cap_bits
        self.details = details


class InternalDisagreement(RuntimeError):
    """Two routes that must agree did not (exit code 3): an implementation bug."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class VerificationFailure(AssertionError):
    """A claimed property failed to verify (exit code 4)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
