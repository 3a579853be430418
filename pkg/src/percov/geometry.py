"""Planar distance primitives and the conflict predicates built on them.

Agents are modelled as closed disks moving along straight legs between
interest points, so every proximity question reduces to point-segment or
segment-segment distance.  Degenerate (zero-length) segments are valid
inputs everywhere and collapse to the point cases.
"""

from __future__ import annotations

import math
from typing import NamedTuple

# Strict "closer than the sum of radii" is evaluated with a small slack so
# that exact tangency (distance == r1 + r2) never registers as a conflict.
CONFLICT_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float


class Segment(NamedTuple):
    start: Point2
    end: Point2

    @property
    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)


def point_distance(a: Point2, b: Point2) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def point_segment_distance(p: Point2, seg: Segment) -> float:
    """Euclidean distance from a point to a closed segment.

    Projects onto the carrier line and clamps the parameter to [0, 1]; a
    zero-length segment degenerates to plain point distance.
    """
    ax, ay = seg.start
    bx, by = seg.end
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den <= 1e-24:
        return math.hypot(p.x - ax, p.y - ay)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / den
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def _segments_intersect(s1: Segment, s2: Segment) -> bool:
    """Proper or touching intersection test via orientation signs."""

    def orient(o: Point2, a: Point2, b: Point2) -> float:
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)

    def on_segment(o: Point2, a: Point2, b: Point2) -> bool:
        return (
            min(o.x, b.x) <= a.x <= max(o.x, b.x)
            and min(o.y, b.y) <= a.y <= max(o.y, b.y)
        )

    p1, p2 = s1.start, s1.end
    p3, p4 = s2.start, s2.end
    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and on_segment(p3, p1, p4):
        return True
    if d2 == 0 and on_segment(p3, p2, p4):
        return True
    if d3 == 0 and on_segment(p1, p3, p2):
        return True
    if d4 == 0 and on_segment(p1, p4, p2):
        return True
    return False


def segment_segment_distance(s1: Segment, s2: Segment) -> float:
    """Minimum distance between two closed segments.

    Zero when they intersect; otherwise the minimum over the four
    endpoint-to-segment distances (the closest pair of non-intersecting
    segments always involves an endpoint).
    """
    if _segments_intersect(s1, s2):
        return 0.0
    return min(
        point_segment_distance(s1.start, s2),
        point_segment_distance(s1.end, s2),
        point_segment_distance(s2.start, s1),
        point_segment_distance(s2.end, s1),
    )


def movement_conflict(s1: Segment, s2: Segment, r1: float, r2: float) -> bool:
    """True when two moving disks could touch: trajectory distance < r1 + r2."""
    return segment_segment_distance(s1, s2) < r1 + r2 - CONFLICT_TOL


def move_cover_conflict(seg: Segment, q: Point2, r1: float, r2: float) -> bool:
    """True when a moving disk could touch a disk parked at q."""
    return point_segment_distance(q, seg) < r1 + r2 - CONFLICT_TOL
