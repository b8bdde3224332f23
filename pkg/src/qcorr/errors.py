"""Exception types shared across the package.

Every error raised on a violated precondition names the check that failed
and, where meaningful, the measured magnitude of the violation.
"""


class QcorrError(Exception):
    """Base class for all package errors."""


class ValidationError(QcorrError):
    """An operator or vector failed a physical-validity check."""


class NotHermitian(ValidationError):
    """Matrix is not Hermitian within tolerance."""


class NotPositive(ValidationError):
    """Matrix has a negative eigenvalue beyond tolerance."""


class TraceMismatch(ValidationError):
    """Trace differs from one beyond tolerance."""


class DimensionMismatch(ValidationError):
    """Shapes or subsystem dimensions are inconsistent."""


class EmptyKeep(QcorrError):
    """partial_trace asked to keep no subsystem."""


class FullKeep(QcorrError):
    """partial_trace asked to keep every subsystem (use the state itself)."""


class IndexOutOfRange(QcorrError):
    """A subsystem index is outside 1..N."""


class TooFewParties(QcorrError):
    """Operation needs at least two parties."""


class NotBipartite(QcorrError):
    """Operation is defined for exactly two parties."""


class BadRank(QcorrError):
    """Requested rank is outside 1..D."""


class BadExponent(QcorrError):
    """Metric exponent p must satisfy p >= 1."""


class UnknownName(QcorrError):
    """No catalog state with the requested name."""


class BadParams(QcorrError):
    """Catalog state parameters are missing, unused, or out of range."""


class ParseError(QcorrError):
    """A file or text field could not be parsed."""


class IoError(QcorrError):
    """A file could not be read or written."""
