"""Camera field-of-view descriptors and their ground-plane geometry.

A field of view is the wedge a camera can see: horizontal/vertical aperture
angles, a 2D direction, and a maximum visible distance. Directions in
[0, 360) are absolute compass bearings; directions in [-360, 0) are
mount-relative and need the carrier's heading to resolve (-360 dead ahead,
-90 right, -180 rear, -270 left). The vertical angle is carried and
validated but plays no part in 2D containment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MissingHeadingError
from .geo import (
    EARTH_RADIUS_M,
    GeoPoint,
    angle_between,
    bearing,
    destination,
    geo_distance,
)

DEFAULT_H_ANGLE = 63.0   # 35mm lens horizontal aperture
DEFAULT_V_ANGLE = 60.0
DEFAULT_DIRECTION = 0.0  # due north
DEFAULT_VIEW_DISTANCE = 100.0


@dataclass(frozen=True)
class FieldOfView:
    """Camera view descriptor: apertures in degrees, view distance in meters."""

    h_angle: float = DEFAULT_H_ANGLE
    v_angle: float = DEFAULT_V_ANGLE
    direction2d: float = DEFAULT_DIRECTION
    view_distance: float = DEFAULT_VIEW_DISTANCE

    def __post_init__(self):
        if not 0.0 < self.h_angle <= 360.0:
            raise ValueError(f"horizontal angle {self.h_angle} outside (0, 360]")
        if not 0.0 < self.v_angle <= 180.0:
            raise ValueError(f"vertical angle {self.v_angle} outside (0, 180]")
        if not -360.0 <= self.direction2d < 360.0:
            raise ValueError(f"direction2d {self.direction2d} outside [-360, 360)")
        if not self.view_distance > 0.0:
            raise ValueError(f"view distance {self.view_distance} must be > 0")

    @property
    def is_relative(self) -> bool:
        """True when direction2d encodes a mount-relative (fixed-camera) offset."""
        return self.direction2d < 0.0


@dataclass(frozen=True)
class SectorPolygon:
    """Closed ring approximating the visible wedge; first position equals the last."""

    ring: tuple[GeoPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "ring", tuple(self.ring))
        if len(self.ring) < 4:
            raise ValueError("sector ring needs at least 4 positions")
        if self.ring[0] != self.ring[-1]:
            raise ValueError("sector ring must be closed")


def resolve_direction(fov: FieldOfView, heading: float | None = None) -> float:
    """Absolute camera bearing in [0, 360).

    Absolute directions pass through unchanged. Mount-relative ones are
    clockwise offsets from the heading: -360 dead ahead, -90 right,
    -180 rear, -270 left.
    """
    if fov.direction2d >= 0.0:
        return fov.direction2d % 360.0
    if heading is None:
        raise MissingHeadingError(
            f"relative direction {fov.direction2d} needs the carrier heading"
        )
    offset = (-fov.direction2d) % 360.0
    return (heading + offset) % 360.0


def fov_sector_polygon(
    camera: GeoPoint,
    abs_direction: float,
    fov: FieldOfView,
    arc_step_deg: float = 5.0,
) -> SectorPolygon:
    """Discretize the visible wedge into a closed ring of ground positions.

    Arc points run from abs_direction - h/2 to abs_direction + h/2 at most
    arc_step_deg apart, both endpoints included, each at view_distance from
    the camera. A 360-degree aperture yields a full circle without the apex.
    """
    if arc_step_deg <= 0:
        raise ValueError("arc step must be > 0")
    segments = max(1, math.ceil(fov.h_angle / arc_step_deg))
    start = abs_direction - fov.h_angle / 2.0
    arc = [
        destination(camera, start + k * fov.h_angle / segments, fov.view_distance)
        for k in range(segments + 1)
    ]
    if fov.h_angle == 360.0:
        arc[-1] = arc[0]
        return SectorPolygon(tuple(arc))
    apex = GeoPoint(camera.lon, camera.lat)
    return SectorPolygon((apex, *arc, apex))


def fov_contains(
    camera: GeoPoint, abs_direction: float, fov: FieldOfView, p: GeoPoint
) -> bool:
    """True when p lies within view distance and the horizontal aperture."""
    d = geo_distance(camera, p)
    if d > fov.view_distance:
        return False
    if d == 0.0:
        return True
    return angle_between(bearing(camera, p), abs_direction % 360.0) <= fov.h_angle / 2.0


def fov_overlap(
    camera_a: GeoPoint,
    dir_a: float,
    fov_a: FieldOfView,
    camera_b: GeoPoint,
    dir_b: float,
    fov_b: FieldOfView,
    arc_step_deg: float = 5.0,
) -> bool:
    """True when the two discretized sectors intersect (shared apex counts).

    The rings are projected onto a local tangent plane centered at camera_a
    and tested by standard polygon intersection.
    """
    if geo_distance(camera_a, camera_b) > fov_a.view_distance + fov_b.view_distance:
        return False
    ring_a = fov_sector_polygon(camera_a, dir_a, fov_a, arc_step_deg).ring
    ring_b = fov_sector_polygon(camera_b, dir_b, fov_b, arc_step_deg).ring
    poly_a = [_to_plane(camera_a, p) for p in ring_a]
    poly_b = [_to_plane(camera_a, p) for p in ring_b]
    return _rings_intersect(poly_a, poly_b)


def _to_plane(origin: GeoPoint, p: GeoPoint) -> tuple[float, float]:
    dlon = (p.lon - origin.lon + 180.0) % 360.0 - 180.0
    x = math.radians(dlon) * math.cos(math.radians(origin.lat)) * EARTH_RADIUS_M
    y = math.radians(p.lat - origin.lat) * EARTH_RADIUS_M
    return (x, y)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_segment(a, b, p) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_intersect(a, b, c, d) -> bool:
    o1 = _orient(a, b, c)
    o2 = _orient(a, b, d)
    o3 = _orient(c, d, a)
    o4 = _orient(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _on_segment(a, b, c):
        return True
    if o2 == 0 and _on_segment(a, b, d):
        return True
    if o3 == 0 and _on_segment(c, d, a):
        return True
    if o4 == 0 and _on_segment(c, d, b):
        return True
    return False


def _point_in_ring(pt, ring) -> bool:
    """Ray-cast point-in-polygon; points on the boundary count as inside."""
    x, y = pt
    inside = False
    for a, b in zip(ring, ring[1:]):
        if _orient(a, b, pt) == 0 and _on_segment(a, b, pt):
            return True
        ay, by = a[1], b[1]
        if (ay > y) != (by > y):
            xcross = a[0] + (y - ay) * (b[0] - a[0]) / (by - ay)
            if x < xcross:
                inside = not inside
    return inside


def _rings_intersect(ring_a, ring_b) -> bool:
    for a, b in zip(ring_a, ring_a[1:]):
        for c, d in zip(ring_b, ring_b[1:]):
            if _segments_intersect(a, b, c, d):
                return True
    if any(_point_in_ring(p, ring_b) for p in ring_a):
        return True
    if any(_point_in_ring(p, ring_a) for p in ring_b):
        return True
    return False
