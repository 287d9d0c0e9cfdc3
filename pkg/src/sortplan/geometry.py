"""Disc primitives and angular-interval algebra.

An approach direction ``theta`` is the direction, seen from the target centre,
from which the end-effector comes in.  The end-effector sweeps a half-strip of
half-width ``target.radius + corridor_radius`` that starts at the target centre
and extends to infinity along ``theta``.  A blocker blocks ``theta`` when its
disc intersects that half-strip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

TWO_PI = 2.0 * math.pi
EPS = 1e-9


def normalize_angle(angle: float) -> float:
    """Map ``angle`` onto ``[0, 2*pi)``, snapping values within EPS of 2*pi to 0."""
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI - EPS:
        a = 0.0
    return a


@dataclass(frozen=True)
class Disc:
    id: int
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disc {self.id}: radius must be > 0, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    def distance_to(self, other: Disc) -> float:
        return math.dist(self.center, other.center)

    def overlaps(self, other: Disc, tol: float = 1e-12) -> bool:
        return self.distance_to(other) < self.radius + other.radius - tol


@dataclass(frozen=True)
class AngularInterval:
    """Arc of directions ``[start, start + extent]``, possibly wrapping past 2*pi."""

    start: float
    extent: float

    def __post_init__(self):
        if not (0.0 < self.extent <= TWO_PI + EPS):
            raise ValueError(f"extent must lie in (0, 2*pi], got {self.extent}")
        object.__setattr__(self, "extent", min(float(self.extent), TWO_PI))
        object.__setattr__(self, "start", normalize_angle(self.start))

    @classmethod
    def centered(cls, center: float, half_angle: float) -> AngularInterval:
        return cls(center - half_angle, 2.0 * half_angle)

    @property
    def end(self) -> float:
        return self.start + self.extent

    @property
    def is_full(self) -> bool:
        return self.extent >= TWO_PI - EPS

    def contains(self, angle: float, tol: float = 0.0) -> bool:
        if self.is_full:
            return True
        offset = normalize_angle(angle - self.start)
        return offset <= self.extent + tol or offset >= TWO_PI - tol

    def contains_open(self, angle: float) -> bool:
        """Strict interior membership (endpoints excluded)."""
        if self.is_full:
            return True
        offset = normalize_angle(angle - self.start)
        return 0.0 < offset < self.extent

    def pieces(self) -> list[tuple[float, float]]:
        """Non-wrapping ``(lo, hi)`` pieces inside ``[0, 2*pi]``."""
        if self.is_full:
            return [(0.0, TWO_PI)]
        if self.end <= TWO_PI:
            return [(self.start, self.end)]
        return [(self.start, TWO_PI), (0.0, self.end - TWO_PI)]


def blocked_half_angle(
    target_radius: float, blocker_radius: float, distance: float, corridor_radius: float
) -> float:
    """Half-angle of the blocked arc around the target-to-blocker direction.

    Returns 0.0 when no direction is blocked.  For a blocker beyond the strip
    width the arc is ``asin((r_b + w) / d)``; a blocker nearer than that also
    clips the strip's end cap, which widens the arc past pi/2.
    """
    w = target_radius + corridor_radius
    reach = blocker_radius + w
    if distance >= reach:
        if distance == reach:
            return math.pi / 2
        return math.asin(reach / distance)
    # End-cap regime: blocked while the rotated centre stays within r_b of the
    # cap segment {s = 0, |t| <= w}.
    if math.sqrt(max(distance**2 - blocker_radius**2, 0.0)) <= w:
        return math.pi / 2 + math.asin(min(blocker_radius / distance, 1.0))
    s = (distance**2 + w**2 - blocker_radius**2) / (2.0 * w * distance)
    return math.pi - math.asin(min(max(s, -1.0), 1.0))


def blocked_interval(target: Disc, blocker: Disc, corridor_radius: float) -> AngularInterval | None:
    """Approach directions for ``target`` that ``blocker`` obstructs, or None."""
    if target.id == blocker.id:
        raise ValueError("target and blocker must be distinct discs")
    if corridor_radius < 0:
        raise ValueError("corridor_radius must be non-negative")
    dx = blocker.center[0] - target.center[0]
    dy = blocker.center[1] - target.center[1]
    d = math.hypot(dx, dy)
    if d == 0.0:
        raise ValueError(f"discs {target.id} and {blocker.id} have coincident centres")
    half = blocked_half_angle(target.radius, blocker.radius, d, corridor_radius)
    if half <= 0.0:
        return None
    return AngularInterval.centered(math.atan2(dy, dx), half)


def _merged_pieces(intervals: Iterable[AngularInterval]) -> list[tuple[float, float]]:
    pieces = sorted(p for iv in intervals for p in iv.pieces())
    merged: list[list[float]] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1] + EPS:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def union_covers_circle(intervals: Sequence[AngularInterval]) -> bool:
    if not intervals:
        return False
    # cheap reject: the arcs cannot cover the circle
    if sum(iv.extent for iv in intervals) < TWO_PI - EPS:
        return False
    merged = _merged_pieces(intervals)
    return len(merged) == 1 and merged[0][0] <= EPS and merged[0][1] >= TWO_PI - EPS


def arcs_cover_circle(arcs: Sequence[tuple[float, float]]) -> bool:
    """Coverage test on raw ``(centre, half_angle)`` pairs; hot path of accessibility."""
    total = 0.0
    for _, half in arcs:
        total += half
    if 2.0 * total < TWO_PI - EPS:
        return False
    pieces = []
    for centre, half in arcs:
        if half >= math.pi - EPS:
            return True
        lo = math.fmod(centre - half, TWO_PI)
        if lo < 0.0:
            lo += TWO_PI
        hi = lo + 2.0 * half
        if hi > TWO_PI:
            pieces.append((lo, TWO_PI))
            pieces.append((0.0, hi - TWO_PI))
        else:
            pieces.append((lo, hi))
    pieces.sort()
    if pieces[0][0] > EPS:
        return False
    reach = pieces[0][1]
    for lo, hi in pieces:
        if lo > reach + EPS:
            return False
        if hi > reach:
            reach = hi
    return reach >= TWO_PI - EPS


def free_gaps(intervals: Sequence[AngularInterval]) -> list[AngularInterval]:
    """Complement of the union in ``[0, 2*pi)`` as maximal arcs sorted by start."""
    merged = _merged_pieces(intervals)
    if not merged:
        return [AngularInterval(0.0, TWO_PI)]
    raw: list[tuple[float, float]] = []
    cursor = 0.0
    for lo, hi in merged:
        if lo - cursor > EPS:
            raw.append((cursor, lo))
        cursor = max(cursor, hi)
    if TWO_PI - cursor > EPS:
        raw.append((cursor, TWO_PI))
    if len(raw) >= 2 and raw[0][0] <= EPS and raw[-1][1] >= TWO_PI - EPS:
        # the gap through angle 0 is one arc
        first = raw.pop(0)
        last = raw.pop()
        raw.append((last[0], TWO_PI + first[1]))
    gaps = [AngularInterval(lo, hi - lo) for lo, hi in raw]
    return sorted(gaps, key=lambda g: g.start)


def measure(intervals: Sequence[AngularInterval]) -> float:
    """Total angular measure of the union."""
    return sum(hi - lo for lo, hi in _merged_pieces(intervals))
