"""Exception hierarchy shared by all geomedia modules."""

from __future__ import annotations


class GeoMediaError(Exception):
    """Base class for all errors raised by this package."""

    code = "Internal"


# -- time-varying values ------------------------------------------------------

class OutOfRangeError(GeoMediaError):
    """Timestamp lies outside the temporal extent of a moving value."""

    code = "BadQuery"


class NotASampleError(GeoMediaError):
    """Discrete-mode lookup at a time that is not a sample time."""

    code = "BadQuery"


class NoOverlapError(GeoMediaError):
    """Slice interval does not overlap the track extent."""

    code = "BadQuery"


class DegenerateTrackError(GeoMediaError):
    """Heading requested on a track with no spatial motion."""

    code = "BadQuery"


# -- geometry ------------------------------------------------------------------

class CoincidentPointsError(GeoMediaError):
    """Bearing between two identical positions is undefined."""

    code = "BadQuery"


class MissingHeadingError(GeoMediaError):
    """Mount-relative FoV direction cannot be resolved without a heading."""

    code = "BadQuery"


# -- codec ----------------------------------------------------------------------

class ParseError(GeoMediaError):
    """A GeoMedia JSON document failed to parse or validate.

    ``path`` is a JSON-pointer-style location of the offending member
    ("" for whole-document problems).
    """

    code = "BadBody"

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.message = message
        self.path = path

    def __str__(self) -> str:
        if self.path:
            return f"{self.path}: {self.message}"
        return self.message


class BadJsonError(ParseError):
    """Input is not well-formed JSON (or uses duplicate members)."""


class UnknownTypeError(ParseError):
    """Document "type" tag is not a known GeoMedia kind."""


class LengthMismatchError(ParseError):
    """Parallel arrays (coordinates/values/times/fov) disagree in length."""


class NonIncreasingTimeError(ParseError):
    """Timeline values are not strictly increasing."""


class BadFieldValueError(ParseError):
    """A member holds a value outside its allowed range or shape."""


class BadDateTimeError(ParseError):
    """A datetime string could not be read as UTC ISO-8601."""


# -- store -----------------------------------------------------------------------

class DuplicateIdError(GeoMediaError):
    """Collection id already in use."""

    code = "Conflict"


class NotFoundError(GeoMediaError):
    """Collection, feature, or annotation does not exist."""

    code = "NotFound"


class KindMismatchError(GeoMediaError):
    """Document kind differs from the collection's media type."""

    code = "KindMismatch"


class BadAnnotationError(GeoMediaError):
    """Annotation violates an invariant (arity, kind, time range)."""

    code = "BadBody"


class StoreIoError(GeoMediaError):
    """Reading or writing the store directory failed."""


class CorruptStoreError(GeoMediaError):
    """Store files are inconsistent with the manifest."""


# -- queries ----------------------------------------------------------------------

class BadQueryError(GeoMediaError):
    """Query parameters are malformed (inverted bbox/interval, bad limit)."""

    code = "BadQuery"


class WrongKindError(GeoMediaError):
    """Operation applied to a media kind that does not support it."""

    code = "KindMismatch"


class NoTemporalOverlapError(GeoMediaError):
    """Similarity requested for tracks with disjoint time extents."""

    code = "BadQuery"
