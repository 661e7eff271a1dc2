"""Exact spatio-temporal predicates and analysis over stored media.

evaluate() refines the store's index candidates with exact predicates, so
its results are identical to a linear scan; the index only buys speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import BadQueryError, NoTemporalOverlapError, WrongKindError
from .fov import FieldOfView, fov_contains, resolve_direction
from .geo import EARTH_RADIUS_M, GeoPoint, geo_distance
from .media import (
    KIND_MOVING_VIDEO,
    KIND_STPHOTO,
    Bbox,
    GeoMediaDocument,
    MovingVideo,
    STPhoto,
)
from .store import FeatureRecord, MediaStore
from .temporal import (
    InterpolationMode,
    MovingDouble,
    MovingPoint,
    TimeInterval,
    TimeStamp,
)


@dataclass(frozen=True)
class QuerySpec:
    """Declarative feature query: spatial box, time window, proximity, visibility."""

    bbox: Bbox | None = None
    interval: TimeInterval | None = None
    near: tuple[GeoPoint, float] | None = None
    visible_from: GeoPoint | None = None
    limit: int | None = None
    offset: int = 0

    def __post_init__(self):
        if self.near is not None and self.near[1] <= 0:
            raise BadQueryError(f"near radius must be > 0, got {self.near[1]}")
        if self.limit is not None and self.limit < 1:
            raise BadQueryError(f"limit must be >= 1, got {self.limit}")
        if self.offset < 0:
            raise BadQueryError(f"offset must be >= 0, got {self.offset}")


class FovState(NamedTuple):
    """Camera position, resolved absolute direction, and FoV entry at one instant."""

    camera: GeoPoint
    direction: float
    fov: FieldOfView


def _payload(x):
    return x.payload if isinstance(x, GeoMediaDocument) else x


def position_at(x, t: TimeStamp) -> GeoPoint:
    """Interpolated position of a trajectory or video at time t."""
    payload = _payload(x)
    if isinstance(payload, MovingPoint):
        return payload.at(t)
    if isinstance(payload, MovingVideo):
        return payload.track.at(t)
    raise WrongKindError(f"{type(payload).__name__} has no evaluable position")


def fov_at(x, t: TimeStamp) -> FovState:
    """Camera, absolute direction, and FoV of a video at time t.

    Per-sample FoV lists select stepwise (the entry of the latest sample at
    or before t); mount-relative directions resolve against the track
    heading at t.
    """
    payload = _payload(x)
    if not isinstance(payload, MovingVideo):
        raise WrongKindError(f"{type(payload).__name__} has no field of view over time")
    camera = payload.track.at(t)
    fov = payload.fovs[payload.fov_index_at(t)]
    if fov.is_relative:
        direction = resolve_direction(fov, payload.track.heading_at(t))
    else:
        direction = resolve_direction(fov)
    return FovState(camera, direction, fov)


def visible_intervals(x, p: GeoPoint, sample_step_ms: int = 100) -> list[TimeInterval]:
    """Maximal time intervals during which p lies inside the video's FoV.

    Containment is sampled at every track timestamp plus a sample_step_ms
    grid over the extent; interval boundaries are sample times, so they are
    accurate to within one step.
    """
    if sample_step_ms < 1:
        raise BadQueryError(f"sample step must be >= 1 ms, got {sample_step_ms}")
    payload = _payload(x)
    if not isinstance(payload, MovingVideo):
        raise WrongKindError(f"{type(payload).__name__} has no field of view over time")
    extent = payload.time_extent()
    times = set(payload.track.times)
    t = extent.start
    while t <= extent.end:
        times.add(t)
        t += sample_step_ms
    out: list[TimeInterval] = []
    run_start = run_end = None
    for t in sorted(times):
        state = fov_at(payload, t)
        if fov_contains(state.camera, state.direction, state.fov, p):
            if run_start is None:
                run_start = t
            run_end = t
        elif run_start is not None:
            out.append(TimeInterval(run_start, run_end))
            run_start = run_end = None
    if run_start is not None:
        out.append(TimeInterval(run_start, run_end))
    return out


def _linear_at(mp: MovingPoint, t: TimeStamp) -> GeoPoint:
    """Linear-mode evaluation regardless of the track's own mode."""
    if mp.mode is not InterpolationMode.LINEAR:
        mp = MovingPoint(mp.times, mp.points, InterpolationMode.LINEAR)
    return mp.at(t)


def trajectory_similarity(a, b) -> float:
    """Mean separation in meters over the tracks' shared time window.

    Sampled at the union of both sample-time sets inside the overlap, with
    linear evaluation; symmetric by construction. A simple synchronized
    distance, not a view-based measure.
    """
    ta = _payload(a)
    tb = _payload(b)
    if not isinstance(ta, MovingPoint) or not isinstance(tb, MovingPoint):
        raise WrongKindError("similarity is defined between two trajectories")
    start = max(ta.times[0], tb.times[0])
    end = min(ta.times[-1], tb.times[-1])
    if start > end:
        raise NoTemporalOverlapError(
            f"extents [{ta.times[0]}, {ta.times[-1]}] and "
            f"[{tb.times[0]}, {tb.times[-1]}] do not overlap"
        )
    times = sorted(t for t in set(ta.times) | set(tb.times) if start <= t <= end)
    total = sum(geo_distance(_linear_at(ta, t), _linear_at(tb, t)) for t in times)
    return total / len(times)


def _near_candidates(record: FeatureRecord) -> list[GeoPoint]:
    payload = record.doc.payload
    if isinstance(payload, MovingPoint):
        return list(payload.points)
    if isinstance(payload, MovingVideo):
        return list(payload.track.points)
    if isinstance(payload, STPhoto):
        return [payload.loc]
    if isinstance(payload, MovingDouble):
        return list(payload.track) if payload.track else []
    return []


def _maybe_visible(payload: MovingVideo, p: GeoPoint) -> bool:
    """Sound quick reject before the sampling sweep.

    The interpolated camera stays within one leg's path length of that leg's
    endpoints; the path length of a degree-space lerp is bounded by the
    meridian+parallel arc sum (raw degree differences, so longitude wrap
    costs what the lerp actually traverses). A point beyond every vertex's
    view distance plus that slack can never be visible.
    """
    pts = payload.track.points
    slack = 0.0
    for a, b in zip(pts, pts[1:]):
        arc = math.radians(abs(a.lat - b.lat)) + math.radians(abs(a.lon - b.lon))
        slack = max(slack, arc * EARTH_RADIUS_M)
    reach = max(f.view_distance for f in payload.fovs) + slack
    return any(geo_distance(v, p) <= reach for v in pts)


def _is_visible_from(record: FeatureRecord, p: GeoPoint) -> bool:
    payload = record.doc.payload
    if isinstance(payload, STPhoto):
        return fov_contains(payload.loc, resolve_direction(payload.fov), payload.fov, p)
    if isinstance(payload, MovingVideo):
        return _maybe_visible(payload, p) and bool(visible_intervals(payload, p))
    raise WrongKindError(f"{record.doc.kind} has no field of view")


def evaluate(store: MediaStore, cid: str, spec: QuerySpec) -> list[FeatureRecord]:
    """Run a QuerySpec against one collection; ordered by fid, then paged."""
    meta = store.get_collection(cid)
    if spec.visible_from is not None and meta.media_type not in (
        KIND_STPHOTO,
        KIND_MOVING_VIDEO,
    ):
        raise WrongKindError(
            f"visibleFrom applies to photo/video collections, not {meta.media_type}"
        )
    candidates = store.st_query(cid, bbox=spec.bbox, interval=spec.interval)
    out = []
    for record in candidates:
        if spec.near is not None:
            point, radius = spec.near
            if not any(geo_distance(c, point) <= radius for c in _near_candidates(record)):
                continue
        if spec.visible_from is not None and not _is_visible_from(record, spec.visible_from):
            continue
        out.append(record)
    if spec.limit is None:
        return out[spec.offset :]
    return out[spec.offset : spec.offset + spec.limit]
