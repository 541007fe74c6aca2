"""Exception hierarchy shared by all multiflow modules.

Numeric failures (poles, singular evaluation points, series or quadrature
breakdown) are kept distinct from configuration problems so the CLI can map
them to different exit codes.
"""

from __future__ import annotations


class MultiflowError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MultiflowError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole of a special function."""


class SingularPointError(DomainError):
    """A measure weight is singular at the requested evaluation point."""


class ExponentDomainError(DomainError):
    """A scaling exponent leaves the range where the closed form is defined."""


class GridError(DomainError):
    """A sampling grid is invalid, or an evaluation point sits too close to
    its edge for the requested stencil."""


class BoxError(DomainError):
    """A quadrature box is too small for the requested heat-kernel trace."""


class ConvergenceError(MultiflowError, RuntimeError):
    """A series or adaptive quadrature failed to reach its tolerance."""


class ConfigError(MultiflowError, ValueError):
    """A run configuration failed to parse or validate."""
