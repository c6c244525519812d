"""Exception types shared across the package."""

from __future__ import annotations


class DriveTextError(Exception):
    """Base class for all package-specific errors."""


class InvalidGeometry(DriveTextError):
    """Non-finite or otherwise invalid geometric input."""


class DegeneratePolyline(DriveTextError):
    """Polyline with (effectively) zero length or fewer than 2 usable points."""


class ShapeMismatch(DriveTextError):
    """Trajectories differ in dt or length where equality is required."""


class EncodeError(DriveTextError):
    """Value cannot be rendered into the text grammar."""


class ParseError(DriveTextError):
    """Malformed text input.

    ``offset`` is the byte offset into the input where parsing failed, when
    known; ``index`` is the index of the failing element (box, polyline) when
    the grammar is element-structured.
    """

    def __init__(self, message: str, offset: int | None = None, index: int | None = None):
        super().__init__(message)
        self.offset = offset
        self.index = index


class UnknownClass(ParseError):
    """Box class label outside the closed vocabulary."""

    def __init__(self, cls: str, index: int | None = None):
        super().__init__(f"unknown class label {cls!r}", index=index)
        self.cls = cls


class TruncationError(DriveTextError):
    """More real polylines than the grammar can hold in strict mode."""

    def __init__(self, dropped: int):
        super().__init__(f"scene exceeds max_polylines; {dropped} lanes would be dropped")
        self.dropped = dropped


class HorizonError(DriveTextError):
    """Requested horizon extends beyond a trajectory."""


class GridError(DriveTextError):
    """Requested timestamp does not lie on the trajectory's time grid."""


class EmptyEvalSet(DriveTextError):
    """Evaluation requested over zero examples."""


class KError(DriveTextError):
    """Invalid cluster/sample count for the available candidates."""


class InvalidScenario(DriveTextError):
    """Scenario lacks the structure required by an operation."""


class EmptyMixture(DriveTextError):
    """Mixture plan requested over zero datasets."""
