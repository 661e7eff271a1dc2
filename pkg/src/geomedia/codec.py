"""GeoMedia JSON codec.

Parses and serializes the four wire formats (MovingPoint, MovingDouble,
stphoto, MovingVideo). Times arrive either as ISO-8601 "datetimes" strings
or as an integer epoch-millisecond "timeline" and are normalized to epoch
milliseconds; the serializer re-emits either style on request. Documents
always round-trip: parse(serialize(doc)) == doc.

Tolerances, chosen to accept real-world producers:
  - type tags match case-insensitively (output uses the canonical spelling,
    including lowercase "stphoto"),
  - member names with stray surrounding whitespace ("datetimes ") are
    treated as their trimmed spelling when unambiguous,
  - datetimes may use single-digit day/month and carry surrounding spaces,
  - FoV view distance is accepted as either "distance" or "viewDistance".

Strictness, chosen to fail loudly: duplicate members and trailing commas
are rejected, only UTC ("Z") datetimes are accepted, and "datetimes" plus
"timeline" in one document is ambiguous and refused.
"""

from __future__ import annotations

import calendar
import json
import re
from datetime import datetime, timezone

from .errors import (
    BadDateTimeError,
    BadFieldValueError,
    BadJsonError,
    LengthMismatchError,
    NonIncreasingTimeError,
    ParseError,
    UnknownTypeError,
)
from .fov import (
    DEFAULT_DIRECTION,
    DEFAULT_H_ANGLE,
    DEFAULT_V_ANGLE,
    DEFAULT_VIEW_DISTANCE,
    FieldOfView,
    SectorPolygon,
)
from .geo import GeoPoint
from .media import (
    KIND_MOVING_DOUBLE,
    KIND_MOVING_POINT,
    KIND_MOVING_VIDEO,
    KIND_STPHOTO,
    GeoMediaDocument,
    MovingVideo,
    STPhoto,
)
from .temporal import InterpolationMode, MovingDouble, MovingPoint, TimeStamp

_CANONICAL_KINDS = {
    "movingpoint": KIND_MOVING_POINT,
    "movingdouble": KIND_MOVING_DOUBLE,
    "stphoto": KIND_STPHOTO,
    "movingvideo": KIND_MOVING_VIDEO,
}

_DATETIME_RE = re.compile(
    r"^(\d{4})-(\d{1,2})-(\d{1,2})T(\d{2}):(\d{2}):(\d{2})(\.\d{1,3})?Z$"
)

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def parse_datetime(s: str) -> TimeStamp:
    """UTC ISO-8601 instant to epoch milliseconds.

    Requires the Z designator; tolerates single-digit day/month and
    surrounding whitespace (both occur in the wild).
    """
    if not isinstance(s, str):
        raise BadDateTimeError(f"datetime must be a string, got {type(s).__name__}")
    m = _DATETIME_RE.match(s.strip())
    if not m:
        raise BadDateTimeError(f"not a UTC ISO-8601 instant: {s!r}")
    year, month, day, hour, minute, sec = (int(g) for g in m.groups()[:6])
    frac = m.group(7)
    if not 1 <= month <= 12:
        raise BadDateTimeError(f"month {month} out of range in {s!r}")
    days = _DAYS_IN_MONTH[month - 1]
    if month == 2 and (year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)):
        days = 29
    if not 1 <= day <= days:
        raise BadDateTimeError(f"day {day} out of range in {s!r}")
    if hour > 23 or minute > 59 or sec > 59:
        raise BadDateTimeError(f"time of day out of range in {s!r}")
    seconds = calendar.timegm((year, month, day, hour, minute, sec, 0, 0, 0))
    millis = 0
    if frac:
        millis = int(frac[1:].ljust(3, "0"))
    return seconds * 1000 + millis


def epoch_to_iso(t: TimeStamp) -> str:
    """Epoch milliseconds to zero-padded UTC ISO-8601; ".000" is suppressed."""
    seconds, millis = divmod(int(t), 1000)
    dt = datetime.fromtimestamp(seconds, tz=timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if millis:
        return f"{base}.{millis:03d}Z"
    return f"{base}Z"


# -- parsing -------------------------------------------------------------------


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise BadJsonError(f"duplicate member {key!r}")
        out[key] = value
    return out


_KNOWN_KEYS = {
    "type", "coordinates", "datetimes", "timeline", "interpolation",
    "values", "uri", "fov",
    "horizontalAngle", "verticalAngle", "direction2d", "distance", "viewDistance",
}


def _normalize_keys(obj: dict) -> dict:
    """Trim stray whitespace off member names when the trimmed name is expected."""
    out = {}
    for key, value in obj.items():
        trimmed = key.strip()
        if trimmed != key and trimmed in _KNOWN_KEYS and trimmed not in obj:
            key = trimmed
        if key in out:
            raise BadJsonError(f"duplicate member {key!r} after trimming whitespace")
        out[key] = value
    return out


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _read_point(value, path: str) -> GeoPoint:
    if (
        not isinstance(value, list)
        or len(value) not in (2, 3)
        or not all(_is_number(c) for c in value)
    ):
        raise BadFieldValueError("position must be [lon, lat] or [lon, lat, alt]", path)
    try:
        alt = float(value[2]) if len(value) == 3 else None
        return GeoPoint(float(value[0]), float(value[1]), alt)
    except ValueError as exc:
        raise BadFieldValueError(str(exc), path) from None


def _read_times(obj: dict, count: int | None, path: str = "") -> tuple[TimeStamp, ...]:
    """Read "datetimes" or "timeline" into epoch milliseconds, checking order."""
    has_dt = "datetimes" in obj
    has_tl = "timeline" in obj
    if has_dt and has_tl:
        raise BadFieldValueError(
            "both 'datetimes' and 'timeline' present; ambiguous", f"{path}/timeline"
        )
    if not has_dt and not has_tl:
        raise BadFieldValueError("missing 'datetimes' or 'timeline'", path or "/")
    member = "datetimes" if has_dt else "timeline"
    raw = obj[member]
    mpath = f"{path}/{member}"
    if not isinstance(raw, list) or not raw:
        raise BadFieldValueError(f"'{member}' must be a non-empty array", mpath)
    times = []
    for i, entry in enumerate(raw):
        if has_dt:
            try:
                times.append(parse_datetime(entry))
            except BadDateTimeError as exc:
                raise BadDateTimeError(exc.message, f"{mpath}/{i}") from None
        else:
            if isinstance(entry, bool) or not isinstance(entry, int):
                raise BadFieldValueError("timeline entries must be integers", f"{mpath}/{i}")
            times.append(entry)
    if count is not None and len(times) != count:
        raise LengthMismatchError(
            f"{len(times)} times for {count} samples", mpath
        )
    for i in range(1, len(times)):
        if times[i] <= times[i - 1]:
            raise NonIncreasingTimeError(
                f"time {times[i]} does not increase past {times[i - 1]}", f"{mpath}/{i}"
            )
    return tuple(times)


def _read_interpolation(obj: dict, path: str = "") -> InterpolationMode:
    raw = obj.get("interpolation", "linear")
    if isinstance(raw, str):
        try:
            return InterpolationMode(raw.strip().lower())
        except ValueError:
            pass
    raise BadFieldValueError(
        f"interpolation must be one of discrete/linear/stepwise, got {raw!r}",
        f"{path}/interpolation",
    )


def _read_track(obj: dict, path: str = "") -> tuple[GeoPoint, ...]:
    raw = obj.get("coordinates")
    if not isinstance(raw, list) or not raw:
        raise BadFieldValueError("'coordinates' must be a non-empty array", f"{path}/coordinates")
    return tuple(_read_point(entry, f"{path}/coordinates/{i}") for i, entry in enumerate(raw))


def _read_number(obj: dict, member: str, default: float, path: str) -> float:
    if member not in obj:
        return default
    value = obj[member]
    if not _is_number(value):
        raise BadFieldValueError(f"'{member}' must be a number", f"{path}/{member}")
    return float(value)


def _read_fov(obj, path: str) -> FieldOfView:
    if not isinstance(obj, dict):
        raise BadFieldValueError("fov must be an object", path)
    obj = _normalize_keys(obj)
    tag = obj.get("type")
    if tag is not None and (not isinstance(tag, str) or tag.lower() != "fov"):
        raise BadFieldValueError(f"fov type tag must be 'fov', got {tag!r}", f"{path}/type")
    if "distance" in obj and "viewDistance" in obj:
        raise BadFieldValueError(
            "both 'distance' and 'viewDistance' present", f"{path}/viewDistance"
        )
    distance_member = "viewDistance" if "viewDistance" in obj else "distance"
    try:
        return FieldOfView(
            h_angle=_read_number(obj, "horizontalAngle", DEFAULT_H_ANGLE, path),
            v_angle=_read_number(obj, "verticalAngle", DEFAULT_V_ANGLE, path),
            direction2d=_read_number(obj, "direction2d", DEFAULT_DIRECTION, path),
            view_distance=_read_number(obj, distance_member, DEFAULT_VIEW_DISTANCE, path),
        )
    except ValueError as exc:
        raise BadFieldValueError(str(exc), path) from None


def _build_moving_point(obj: dict) -> tuple[MovingPoint, set[str]]:
    points = _read_track(obj)
    times = _read_times(obj, len(points))
    mode = _read_interpolation(obj)
    with_alt = sum(1 for p in points if p.alt is not None)
    if with_alt not in (0, len(points)):
        raise BadFieldValueError(
            "coordinates mix 2- and 3-component positions", "/coordinates"
        )
    return MovingPoint(times, points, mode), {"coordinates", "datetimes", "timeline", "interpolation"}


def _build_moving_double(obj: dict) -> tuple[MovingDouble, set[str]]:
    raw_values = obj.get("values")
    if not isinstance(raw_values, list) or not raw_values:
        raise BadFieldValueError("'values' must be a non-empty array", "/values")
    for i, v in enumerate(raw_values):
        if not _is_number(v):
            raise BadFieldValueError("values must be numbers", f"/values/{i}")
    times = _read_times(obj, len(raw_values))
    mode = _read_interpolation(obj)
    track = None
    if "coordinates" in obj:
        track = _read_track(obj)
        if len(track) != len(raw_values):
            raise LengthMismatchError(
                f"{len(track)} coordinates for {len(raw_values)} values", "/coordinates"
            )
    md = MovingDouble(times, tuple(float(v) for v in raw_values), mode, track)
    return md, {"values", "datetimes", "timeline", "coordinates", "interpolation"}


def _read_uri(obj: dict) -> str:
    uri = obj.get("uri")
    if not isinstance(uri, str) or not uri:
        raise BadFieldValueError("'uri' must be a non-empty string", "/uri")
    return uri


def _build_stphoto(obj: dict) -> tuple[STPhoto, set[str]]:
    uri = _read_uri(obj)
    loc = _read_point(obj.get("coordinates"), "/coordinates")
    times = _read_times(obj, None)
    if len(times) != 1:
        raise LengthMismatchError(
            f"a photo has exactly one timestamp, got {len(times)}",
            "/datetimes" if "datetimes" in obj else "/timeline",
        )
    fov = _read_fov(obj["fov"], "/fov") if "fov" in obj else FieldOfView()
    try:
        photo = STPhoto(uri, loc, times[0], fov)
    except ValueError as exc:
        raise BadFieldValueError(str(exc), "/fov/direction2d") from None
    return photo, {"uri", "coordinates", "datetimes", "timeline", "fov"}


def _build_moving_video(obj: dict) -> tuple[MovingVideo, set[str]]:
    uri = _read_uri(obj)
    points = _read_track(obj)
    times = _read_times(obj, len(points))
    mode = _read_interpolation(obj)
    fovs: tuple[FieldOfView, ...]
    if "fov" in obj:
        raw = obj["fov"]
        if not isinstance(raw, list) or not raw:
            raise BadFieldValueError("'fov' must be a non-empty array", "/fov")
        fovs = tuple(_read_fov(entry, f"/fov/{i}") for i, entry in enumerate(raw))
        if len(fovs) not in (1, len(points)):
            raise LengthMismatchError(
                f"{len(fovs)} fov entries for {len(points)} samples", "/fov"
            )
    else:
        fovs = (FieldOfView(),)
    track = MovingPoint(times, points, mode)
    return MovingVideo(uri, track, fovs), {
        "uri", "coordinates", "fov", "datetimes", "timeline", "interpolation",
    }


_BUILDERS = {
    KIND_MOVING_POINT: _build_moving_point,
    KIND_MOVING_DOUBLE: _build_moving_double,
    KIND_STPHOTO: _build_stphoto,
    KIND_MOVING_VIDEO: _build_moving_video,
}


def parse_document(text: bytes | str) -> GeoMediaDocument:
    """Parse one GeoMedia JSON document, normalizing times to epoch milliseconds.

    Unrecognized top-level members are preserved on the returned document and
    re-emitted by serialize_document. Errors carry a JSON-pointer-style path.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BadJsonError(f"not UTF-8: {exc}") from None
    try:
        obj = json.loads(text, object_pairs_hook=_reject_duplicates)
    except BadJsonError:
        raise
    except json.JSONDecodeError as exc:
        raise BadJsonError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise BadJsonError("document must be a JSON object")
    obj = _normalize_keys(obj)
    tag = obj.get("type")
    if not isinstance(tag, str):
        raise UnknownTypeError("missing 'type' member", "/type")
    kind = _CANONICAL_KINDS.get(tag.strip().lower())
    if kind is None:
        raise UnknownTypeError(f"unknown media type {tag!r}", "/type")
    try:
        payload, consumed = _BUILDERS[kind](obj)
    except ParseError:
        raise
    except ValueError as exc:
        raise BadFieldValueError(str(exc)) from None
    extras = tuple((k, v) for k, v in obj.items() if k != "type" and k not in consumed)
    return GeoMediaDocument(kind, payload, extras)


# -- serialization -------------------------------------------------------------


def _num(x: float):
    """Emit integral floats as JSON integers; timelines stay integers anyway."""
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def _coord(p: GeoPoint) -> list:
    if p.alt is None:
        return [_num(p.lon), _num(p.lat)]
    return [_num(p.lon), _num(p.lat), _num(p.alt)]


def _time_member(times, time_style: str) -> tuple[str, list]:
    if time_style == "epoch":
        return "timeline", [int(t) for t in times]
    if time_style == "iso":
        return "datetimes", [epoch_to_iso(t) for t in times]
    raise ValueError(f"time style must be 'iso' or 'epoch', got {time_style!r}")


def _photo_fov_obj(fov: FieldOfView) -> dict:
    return {
        "type": "fov",
        "horizontalAngle": _num(fov.h_angle),
        "verticalAngle": _num(fov.v_angle),
        "direction2d": _num(fov.direction2d),
        "distance": _num(fov.view_distance),
    }


def _video_fov_obj(fov: FieldOfView) -> dict:
    return {
        "verticalAngle": _num(fov.v_angle),
        "horizontalAngle": _num(fov.h_angle),
        "viewDistance": _num(fov.view_distance),
        "direction2d": _num(fov.direction2d),
    }


def document_to_obj(doc: GeoMediaDocument, time_style: str = "epoch") -> dict:
    """Canonical JSON object form of a document (member order fixed per kind)."""
    payload = doc.payload
    out: dict = {"type": doc.kind}
    if isinstance(payload, MovingPoint):
        out["coordinates"] = [_coord(p) for p in payload.points]
        key, value = _time_member(payload.times, time_style)
        out[key] = value
        out["interpolation"] = payload.mode.value
    elif isinstance(payload, MovingDouble):
        out["values"] = [_num(v) for v in payload.values]
        key, value = _time_member(payload.times, time_style)
        out[key] = value
        if payload.track is not None:
            out["coordinates"] = [_coord(p) for p in payload.track]
        out["interpolation"] = payload.mode.value
    elif isinstance(payload, STPhoto):
        out["uri"] = payload.imguri
        out["coordinates"] = _coord(payload.loc)
        key, value = _time_member((payload.t,), time_style)
        out[key] = value
        out["fov"] = _photo_fov_obj(payload.fov)
    elif isinstance(payload, MovingVideo):
        out["uri"] = payload.videouri
        out["coordinates"] = [_coord(p) for p in payload.track.points]
        out["fov"] = [_video_fov_obj(f) for f in payload.fovs]
        key, value = _time_member(payload.track.times, time_style)
        out[key] = value
        out["interpolation"] = payload.track.mode.value
    else:
        raise TypeError(f"not a media payload: {type(payload).__name__}")
    for key, value in doc.extras:
        out[key] = value
    return out


def serialize_document(doc: GeoMediaDocument, time_style: str = "epoch") -> bytes:
    """Serialize to canonical single-line UTF-8 JSON (deterministic bytes)."""
    return json.dumps(document_to_obj(doc, time_style), separators=(", ", ": ")).encode("utf-8")


# -- GeoJSON interoperability ---------------------------------------------------


def geojson_point(p: GeoPoint) -> dict:
    return {"type": "Point", "coordinates": _coord(p)}


def geojson_linestring(points) -> dict:
    return {"type": "LineString", "coordinates": [_coord(p) for p in points]}


def geojson_polygon(sector: SectorPolygon) -> dict:
    return {"type": "Polygon", "coordinates": [[_coord(p) for p in sector.ring]]}


def geojson_feature(geometry: dict | None, properties: dict | None = None) -> dict:
    return {"type": "Feature", "geometry": geometry, "properties": properties or {}}


def geojson_feature_collection(features) -> dict:
    return {"type": "FeatureCollection", "features": list(features)}
