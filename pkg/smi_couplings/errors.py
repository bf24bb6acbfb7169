"""
Exceptions raised by smi_couplings

Every error carries a machine-readable code and the process exit code the CLI
should use for it. Verification failures are not exceptions: they come back as
reports with a witness.
"""
import typing


class SmiError(Exception):
    """
    Base class for everything this package raises on purpose
    """

    code = "error"
    exit_code = 2

    def __init__(self, message: str, witness: typing.Optional[typing.Dict] = None) -> None:
        super().__init__(message)
        self.message = message
        self.witness = witness or {}

    def to_dict(self) -> typing.Dict:
        return dict(code=self.code, message=self.message, witness=self.witness)


class ValidationError(SmiError):
    """
    Input data does not describe the object it claims to (graph, group, action...)
    """

    code = "validation"


class UnknownReferenceError(ValidationError):
    code = "unknown-reference"


class ContextMismatchError(ValidationError):
    code = "context-mismatch"


class NotCertifiedError(ValidationError):
    code = "not-certified"


class ConfigError(SmiError):
    code = "config"


class TruncationCapError(SmiError):
    """
    An enumeration grew past the configured cap
    """

    code = "truncation-cap"
    exit_code = 3


class ViewTooSmallError(SmiError):
    code = "view-too-small"


class MarginError(SmiError):
    code = "margin"


class DomainTooSmallError(SmiError):
    code = "domain-too-small"
