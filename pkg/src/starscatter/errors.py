"""Exception hierarchy shared by all modules.

Every error carries a stable ``category`` string; the CLI maps categories to
exit codes.
"""

from __future__ import annotations


class StarScatterError(Exception):
    category = "internal"


class InvalidArgument(StarScatterError, ValueError):
    category = "invalid-argument"


class DomainError(StarScatterError, ValueError):
    category = "domain-error"


class InvalidShape(StarScatterError, ValueError):
    """Radial function is not strictly positive (starlike violation)."""

    category = "invalid-shape"


class InvalidGrid(StarScatterError, ValueError):
    category = "invalid-grid"


class IncompleteData(StarScatterError, ValueError):
    category = "incomplete-data"


class SolverFailure(StarScatterError, RuntimeError):
    """Discrete boundary integral system is singular or ill-conditioned."""

    category = "solver-failure"

    def __init__(self, message: str, rcond: float | None = None):
        super().__init__(message)
        self.rcond = rcond


class UnreliableSMatrix(StarScatterError, RuntimeError):
    category = "unreliable-s"


class StepTooLarge(StarScatterError, RuntimeError):
    category = "step-too-large"


class InsufficientBandwidth(StarScatterError, ValueError):
    category = "insufficient-bandwidth"


class InvalidIterate(StarScatterError, RuntimeError):
    category = "invalid-iterate"


class ParseError(StarScatterError, ValueError):
    category = "parse-error"


class DuplicateCoefficient(ParseError):
    category = "duplicate-coefficient"


class InputNotFound(StarScatterError, FileNotFoundError):
    category = "input-not-found"


class NonConvergence(StarScatterError, RuntimeError):
    category = "non-convergence"
