"""Shared exception types."""


class ConfigError(ValueError):
    """Raised for invalid configuration: bad grid sizes, overlapping patches,
    malformed config files. Carries a field-level message where possible."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine produces non-finite intermediate values."""
