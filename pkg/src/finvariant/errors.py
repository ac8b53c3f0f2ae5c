"""Exception types shared across the package.

The CLI maps these onto its exit codes: validation failures exit 2, cap
overruns exit 3, and route disagreements exit 4.
"""

from __future__ import annotations


class FInvariantError(Exception):
    """Base class for all package errors."""


class WordError(FInvariantError):
    """Malformed word, letter, or letter order."""


class CapExceeded(FInvariantError):
    """A configured size cap would be exceeded."""


class BallCapExceeded(CapExceeded):
    """Ball enumeration beyond the ball cap."""


class PatternCapExceeded(CapExceeded):
    """Pattern-space size beyond the pattern cap."""


class InvalidDistribution(FInvariantError):
    """Negative weights or normalization failure beyond tolerance."""


class InvalidSystem(FInvariantError):
    """A system description violates its invariants.

    Carries the full validation report so callers can print per-violation
    diagnostics.
    """

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class DisconnectedSet(FInvariantError):
    """Pattern set is not prefix-closed; carries a hull suggestion."""

    def __init__(self, message: str, hull=None):
        self.hull = hull
        super().__init__(message)


class RouteDisagreement(FInvariantError):
    """Two routes that must agree differ beyond tolerance."""
