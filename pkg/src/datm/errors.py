"""Exception hierarchy shared across the package.

Three broad families map onto the CLI exit codes: configuration problems
(exit 2), bad or missing data (exit 3), and numeric failures (exit 4).
"""


class DatmError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(DatmError):
    """Invalid parameter, flag, or config-file entry."""

    exit_code = 2


class DataError(DatmError):
    """Malformed, inconsistent, or missing input data."""

    exit_code = 3


class FormatError(DataError):
    """Structurally invalid file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class OutOfVocabularyError(DataError):
    """Lookup of a term not present in the vocabulary."""


class JoinError(DataError):
    """A document id could not be matched to required metadata."""


class MissingTermsError(DataError):
    """A contrast word list resolved to no vocabulary terms at all."""


class NumericError(DatmError):
    """Numerically degenerate input or failed numeric procedure."""

    exit_code = 4


class DegenerateQueryError(NumericError):
    """Zero-norm or otherwise unusable query vector."""


class InsufficientDataError(NumericError):
    """Too few usable samples for the requested estimate."""


class InfeasibleConfigError(ConfigError):
    """Hyperparameters that cannot produce a valid model (e.g. k > V)."""
