"""Exception taxonomy shared across the package.

The split mirrors the CLI exit codes: structural/precondition/domain
problems are usage errors (exit 1), conditioning and convergence
failures are numerical (exit 2), and a violated mathematical property
is its own category (exit 3) so harnesses can triage.
"""

from __future__ import annotations


class BallmultError(Exception):
    """Base class for all package errors."""


class StructureError(BallmultError, ValueError):
    """Malformed input: dimension mismatch, bad arity, unknown config key."""


class PreconditionError(BallmultError, ValueError):
    """Structurally valid input that violates a mathematical precondition."""


class DomainError(BallmultError, ValueError):
    """Point or spectrum outside the domain required by an operation."""


class ConfigurationError(BallmultError, ValueError):
    """Missing or inconsistent configuration (e.g. absent constant-table entry)."""


class NumericalError(BallmultError, RuntimeError):
    """Conditioning or convergence failure; carries the achieved residual."""

    def __init__(self, message: str, *, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class PropertyViolation(BallmultError, RuntimeError):
    """A mathematical property that should hold was observed to fail."""


class ConditioningWarning(UserWarning):
    """Attached when a kernel or linear system is close to singular."""
