"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`HierDecayError`
so callers (the CLI in particular) can map failures onto exit codes.
"""

from __future__ import annotations


class HierDecayError(Exception):
    """Base class for all package errors."""


class ParameterError(HierDecayError, ValueError):
    """Invalid physical or numerical parameters."""


class ConfigError(HierDecayError, ValueError):
    """Malformed run configuration (unknown key, wrong type, ...)."""


class NumericalError(HierDecayError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy result."""


class SecularConvergenceError(NumericalError):
    """Root refinement of the secular equation did not converge for some roots.

    Attributes
    ----------
    roots : complex array with the last iterates for all roots
    unconverged : indices of the roots that did not meet the tolerance
    brackets : real-axis seed interval ``(lo, hi)`` of every unconverged root
    """

    def __init__(self, message, roots, unconverged, brackets):
        super().__init__(message)
        self.roots = roots
        self.unconverged = list(unconverged)
        self.brackets = list(brackets)


class PoleProximityError(NumericalError):
    """Eigenvalue sits on top of a pseudo-continuum level."""

    def __init__(self, message, level_index):
        super().__init__(message)
        self.level_index = level_index


class IntegrationError(NumericalError):
    """The adaptive ODE integrator gave up (typically step-size underflow)."""

    def __init__(self, message, stiffness_scale=None):
        super().__init__(message)
        self.stiffness_scale = stiffness_scale


class ValidityHorizonError(HierDecayError, ValueError):
    """Requested times reach the recurrence of the discretized continuum."""

    def __init__(self, message, recurrence_time):
        super().__init__(message)
        self.recurrence_time = recurrence_time


class FitError(HierDecayError, ValueError):
    """Fit preconditions violated (window too short, non-positive data, ...)."""


class EnsembleError(NumericalError):
    """A realization in an ensemble run failed."""

    def __init__(self, message, seed, index):
        super().__init__(message)
        self.seed = seed
        self.index = index
