from __future__ import annotations

__all__ = [
    "QmitmError",
    "InstanceError",
    "FormatError",
    "GuardError",
    "ConfigurationError",
    "CertificateError",
]


class QmitmError(Exception):
    """Base class for every error raised by this package"""

    pass


class InstanceError(QmitmError, ValueError):
    """Error that is raised when a problem instance violates its type invariants"""

    pass


class FormatError(InstanceError):
    """
    Error that is raised when an instance file cannot be parsed.

    :param message: What went wrong.
    :param line_number: 1-based line of the offending input, if known.
    """

    def __init__(self, message: str, line_number: int | None = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class GuardError(QmitmError):
    """Error that is raised when an input exceeds a desk-scale enumeration guard"""

    pass


class ConfigurationError(QmitmError):
    """Error that is raised when a configuration document fails validation"""

    pass


class CertificateError(QmitmError, AssertionError):
    """
    Error that is raised when a solver is about to emit a witness that does not verify,
    or when an executable form of a proof step fails. Never caught inside the package.
    """

    pass
