"""Exception taxonomy shared by the library and the command line.

Each class carries the process exit code the CLI reports for it.
"""


class LeeModelError(Exception):
    exit_code = 5
    category = "internal"


class ConfigError(LeeModelError):
    """Invalid configuration; ``errors`` lists every problem found, not just the first."""

    exit_code = 2
    category = "configuration"

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class DomainError(LeeModelError, ValueError):
    exit_code = 3
    category = "domain"


class UnsupportedError(DomainError):
    category = "unsupported"


class NotFoundError(DomainError):
    category = "not_found"


class AccuracyError(LeeModelError, ArithmeticError):
    """A truncation or quadrature tolerance could not be met."""

    exit_code = 4
    category = "accuracy"

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        if achieved is not None:
            message = f"{message} (achieved bound {achieved:.3e})"
        super().__init__(message)
