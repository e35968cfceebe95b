"""Exception hierarchy shared by all modules.

Every error raised on purpose by the toolkit derives from
:class:`HyperentError`, so callers (notably the CLI) can separate
expected failures from programming errors.
"""

from __future__ import annotations


class HyperentError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(HyperentError):
    """A run configuration failed validation."""


class ComputationError(HyperentError):
    """A numerical routine could not produce a trustworthy answer."""


class DegeneracyError(ComputationError):
    """The Fermi level is degenerate at the requested filling."""


class InvalidCorrelationMatrix(ComputationError):
    """A correlation matrix has eigenvalues outside [0, 1] beyond tolerance."""


class SingularSpectrumError(ComputationError):
    """A spectrum contains modes at 0 or 1 where a logarithm is required."""


class ConditioningError(ComputationError):
    """A root finder or linear solve is too ill-conditioned to trust."""


class GaplessError(ComputationError):
    """A topological invariant was requested for a gapless state."""


class InternalInconsistencyError(ComputationError):
    """An identity that must hold exactly was violated numerically."""


class SizeCapError(HyperentError, ValueError):
    """A brute-force routine was asked to handle a system that is too large."""


class DomainError(HyperentError, ValueError):
    """An argument lies outside the mathematical domain of a function."""
