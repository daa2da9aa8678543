"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so new error classes should
extend one of the existing branches rather than raising bare ValueError.
"""

from __future__ import annotations


class TorsolveError(Exception):
    """Base class for all package errors."""


class DomainError(TorsolveError):
    """An argument is outside the mathematical domain of the operation."""


class CompatibilityError(TorsolveError):
    """A right-hand side fails the solvability compatibility conditions."""

    def __init__(self, message: str, offenders=None, report=None):
        super().__init__(message)
        self.offenders = list(offenders) if offenders is not None else []
        self.report = report


class ClosednessError(TorsolveError):
    """A coefficient 1-form is not closed on the requested frequency box."""

    def __init__(self, message: str, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations is not None else []


class BandwidthError(TorsolveError):
    """A spectral multiplication overflowed the configured bandwidth cap."""


class ResourceError(TorsolveError):
    """A request would exceed the configured resource bounds."""


class NoWitnessError(TorsolveError):
    """No admissible small-divisor witness sequence could be produced."""


class ConfigError(TorsolveError):
    """A configuration document is malformed or incomplete."""
