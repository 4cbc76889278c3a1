"""Exception hierarchy for ricci4."""

from __future__ import annotations


class Ricci4Error(Exception):
    """Base class for all errors raised by ricci4."""


class UnknownSignatureError(Ricci4Error, ValueError):
    """Structure constants that do not name a unimodular 3D Lie group."""


class SingularMetricError(Ricci4Error, ZeroDivisionError):
    """A metric coefficient vanished where it appears in a denominator."""


class DomainError(Ricci4Error, ValueError):
    """Input outside the domain of a formula.

    ``blowup_time`` is set when the domain is bounded by a finite-time
    singularity of a flow.
    """

    def __init__(self, message: str, blowup_time: float | None = None):
        super().__init__(message)
        self.blowup_time = blowup_time


class UnsupportedGroupError(Ricci4Error, ValueError):
    pass


class UnsupportedSignatureError(Ricci4Error, ValueError):
    pass


class DegenerateRelationError(Ricci4Error, ValueError):
    pass


class ConfigurationError(Ricci4Error, ValueError):
    pass
