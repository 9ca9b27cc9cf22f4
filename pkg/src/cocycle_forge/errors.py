"""Exception hierarchy.

Two families matter to callers: malformed or out-of-range input (plain
``CocycleError`` subclasses) and well-formed requests that cannot be met
(``Infeasible`` subclasses, which carry a machine-readable ``reason``).
"""

from __future__ import annotations


class CocycleError(ValueError):
    """Base class for every error raised by this package."""

    @property
    def reason(self) -> str:
        return type(self).__name__


class InvalidCocycle(CocycleError):
    pass


class SingularProduct(CocycleError):
    pass


class ShapeMismatch(CocycleError):
    pass


class InvalidSplitting(CocycleError):
    pass


class NoInvariantSplitting(CocycleError):
    pass


class InvalidPartition(CocycleError):
    pass


class IndexOutOfRange(CocycleError):
    pass


class EndpointMismatch(CocycleError):
    pass


class EmptyLanguage(CocycleError):
    pass


class DomainEscape(CocycleError):
    def __init__(self, message: str, boxes=()):
        super().__init__(message)
        self.boxes = tuple(boxes)


class ZeroSeed(CocycleError):
    pass


class InvariantViolation(CocycleError):
    pass


class Infeasible(CocycleError):
    """The request is well formed but no admissible answer exists."""


class InsufficientBudget(Infeasible):
    pass


class NotHyperbolic(Infeasible):
    pass


class PreconditionViolated(Infeasible):
    pass


class SignObstruction(Infeasible):
    pass


class OrientationObstruction(Infeasible):
    pass


class NoCentralPlane(Infeasible):
    pass


class InvalidArgument(CocycleError):
    pass


class InternalError(RuntimeError):
    """A computed object broke an invariant the code guarantees: always a bug."""
