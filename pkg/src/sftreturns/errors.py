"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: invalid instances and malformed
configuration exit 2, domain violations exit 3, numerical failures exit 4.
"""


class SftReturnsError(Exception):
    """Base class for all package-specific errors."""


class InvalidSystemError(SftReturnsError, ValueError):
    """The symbolic system description violates a structural invariant."""


class ConfigurationError(SftReturnsError, ValueError):
    """A run-time parameter or configuration file is unusable."""


class DomainError(SftReturnsError, ValueError):
    """A parameter lies outside the certified domain of an operation."""


class NumericError(SftReturnsError, RuntimeError):
    """An iteration failed to converge or a certified bound is unattainable."""
