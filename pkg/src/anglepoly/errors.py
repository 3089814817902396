"""Exception hierarchy for anglepoly."""


class AnglePolyError(Exception):
    """Base class for all library errors."""


class DegenerateVertex(AnglePolyError):
    pass


class NotClosedToInteger(AnglePolyError):
    pass


class OutOfRange(AnglePolyError, ValueError):
    pass


class PreconditionViolation(AnglePolyError):
    pass


class InconsistentSequence(AnglePolyError):
    pass


class InternalInconsistency(AnglePolyError):
    """Raised when an internal invariant fails (a bug, not bad input)."""


class LengthBelowFenchel(AnglePolyError):
    pass


class RecursionExhausted(InternalInconsistency):
    pass


class NoWitness(AnglePolyError):
    pass


class SignedSequenceInconsistent(InternalInconsistency):
    pass


class TooLarge(AnglePolyError):
    pass


class Unrealizable(AnglePolyError):
    """Negative result of the 3D pipeline; ``reason`` names the failed test."""

    TOTAL_CURVATURE_BELOW_2PI = "TotalCurvatureBelow2Pi"
    NO_SPHERICAL_REALIZATION = "NoSphericalRealization"

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail
