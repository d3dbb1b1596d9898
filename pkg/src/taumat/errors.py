"""Exception types shared across the package."""


class TaumatError(Exception):
    """Base class for all package errors."""


class SizeMismatch(TaumatError):
    """Row and column block totals disagree where a square matrix is required."""


class DivergentIntegral(TaumatError):
    """The deformed integrand is not integrable on an unbounded domain."""


class UnsupportedBackend(TaumatError):
    """The measure backend cannot evaluate the requested pairing."""


class DegenerateTau(TaumatError):
    """A tau value needed as a divisor is numerically zero."""


class WindowTooNarrow(TaumatError):
    """A Laurent coefficient was requested outside the trusted window."""


class IndexOutOfRange(TaumatError):
    """A block or time index lies outside the configured range."""


class ConfigInvalid(TaumatError):
    """A run configuration failed validation."""


class RejectionStarvation(TaumatError):
    """Monte-Carlo rejection sampling accepted too few paths."""
