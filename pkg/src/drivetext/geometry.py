"""BEV geometry primitives: frames, trajectories, polylines, arc-length tools.

Frame convention used everywhere in this package: x points forward, y points
left, headings are counter-clockwise-positive radians normalized to (-pi, pi].
Distances are Euclidean in the BEV plane; z exists only on 3D boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DegeneratePolyline, InvalidGeometry, ShapeMismatch

_TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    if not math.isfinite(theta):
        raise InvalidGeometry(f"non-finite angle {theta!r}")
    return -((-theta + math.pi) % _TWO_PI - math.pi)


@dataclass(frozen=True)
class Waypoint:
    """A BEV position in meters (x forward, y left)."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidGeometry(f"non-finite waypoint ({self.x!r}, {self.y!r})")


@dataclass(frozen=True)
class Pose2D:
    """Global-frame pose; heading is normalized to (-pi, pi] on construction."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidGeometry(f"non-finite pose position ({self.x!r}, {self.y!r})")
        object.__setattr__(self, "heading", normalize_angle(self.heading))


ORIGIN_POSE = Pose2D(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly timestamped waypoints; consecutive points are dt seconds apart.

    Future trajectories place point i at time (i+1)*dt; histories end at the
    current position (t=0). See docs/format.md for the time conventions.
    """

    dt: float
    points: tuple[Waypoint, ...]

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidGeometry(f"dt must be positive, got {self.dt!r}")
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise InvalidGeometry("trajectory must have at least one point")

    def __len__(self) -> int:
        return len(self.points)

    def coords(self) -> list[tuple[float, float]]:
        return [(p.x, p.y) for p in self.points]

    @classmethod
    def from_xy(cls, dt: float, xy: Iterable[tuple[float, float]]) -> "Trajectory":
        return cls(dt, tuple(Waypoint(float(x), float(y)) for x, y in xy))


@dataclass(frozen=True)
class Polyline:
    """Directional chain of >= 2 waypoints; index order is the traffic direction."""

    points: tuple[Waypoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 2:
            raise DegeneratePolyline(f"polyline needs >= 2 points, got {len(self.points)}")
        for a, b in zip(self.points, self.points[1:]):
            if a.x == b.x and a.y == b.y:
                raise InvalidGeometry(f"consecutive identical points at ({a.x}, {a.y})")

    def __len__(self) -> int:
        return len(self.points)

    def coords(self) -> list[tuple[float, float]]:
        return [(p.x, p.y) for p in self.points]

    @classmethod
    def from_xy(cls, xy: Iterable[tuple[float, float]]) -> "Polyline":
        return cls(tuple(Waypoint(float(x), float(y)) for x, y in xy))


def transform_to_ego(points: Sequence[Waypoint], ego: Pose2D) -> list[Waypoint]:
    """Map global-frame points into the ego frame of ``ego``.

    Applies R(-heading) @ (p - ego_position); inverse of transform_to_global.
    """
    c = math.cos(ego.heading)
    s = math.sin(ego.heading)
    out = []
    for p in points:
        dx = p.x - ego.x
        dy = p.y - ego.y
        out.append(Waypoint(c * dx + s * dy, -s * dx + c * dy))
    return out


def transform_to_global(points: Sequence[Waypoint], ego: Pose2D) -> list[Waypoint]:
    """Map ego-frame points back into the global frame (inverse of transform_to_ego)."""
    c = math.cos(ego.heading)
    s = math.sin(ego.heading)
    return [Waypoint(ego.x + c * p.x - s * p.y, ego.y + s * p.x + c * p.y) for p in points]


def cumulative_arclengths(points: Sequence[Waypoint]) -> list[float]:
    """Arc length from the first point to each point, [0, ..., total]."""
    out = [0.0]
    for a, b in zip(points, points[1:]):
        out.append(out[-1] + math.hypot(b.x - a.x, b.y - a.y))
    return out


def polyline_length(p: Polyline) -> float:
    return cumulative_arclengths(p.points)[-1]


def _interp_at(points: Sequence[Waypoint], cums: Sequence[float], s: float) -> Waypoint:
    total = cums[-1]
    if s <= 0.0:
        return points[0]
    if s >= total:
        return points[-1]
    # locate the containing segment
    lo, hi = 0, len(cums) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cums[mid] <= s:
            lo = mid
        else:
            hi = mid
    a, b = points[lo], points[lo + 1]
    seg = cums[lo + 1] - cums[lo]
    t = (s - cums[lo]) / seg
    return Waypoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def point_at_arclength(p: Polyline, s: float) -> Waypoint:
    """Point on the polyline at arc length ``s``, clamped to [0, length]."""
    return _interp_at(p.points, cumulative_arclengths(p.points), s)


def arc_length_resample(
    p: Polyline,
    interval: float,
    anchor_arclength: float = 0.0,
    min_separation: float = 1e-9,
) -> Polyline:
    """Resample a polyline at arc lengths {anchor + k*interval}, keeping both endpoints.

    Lattice samples closer than ``min_separation`` (in arc length) to an
    already-kept sample are dropped, so endpoints can never be duplicated.
    """
    if interval <= 0:
        raise ValueError(f"interval must be positive, got {interval}")
    if not (0.0 <= anchor_arclength < interval):
        raise ValueError(f"anchor_arclength must lie in [0, interval), got {anchor_arclength}")
    cums = cumulative_arclengths(p.points)
    total = cums[-1]
    if total <= max(min_separation, 1e-12):
        raise DegeneratePolyline(f"polyline length {total} too short to resample")

    lattice = []
    k = 0
    while True:
        s = anchor_arclength + k * interval
        if s > total:
            break
        lattice.append(s)
        k += 1

    kept = [0.0]
    for s in lattice:
        if s - kept[-1] >= min_separation and total - s >= min_separation:
            kept.append(s)
    kept.append(total)

    pts: list[Waypoint] = []
    for s in kept:
        q = _interp_at(p.points, cums, s)
        if pts and q.x == pts[-1].x and q.y == pts[-1].y:
            continue
        pts.append(q)
    if len(pts) < 2:
        raise DegeneratePolyline("resampling collapsed the polyline to a single point")
    return Polyline(tuple(pts))


def mean_abs_curvature(p: Polyline) -> float:
    """Mean absolute turn angle per meter: sum of |vertex turn| / total length."""
    total = polyline_length(p)
    turn = 0.0
    pts = p.points
    for i in range(1, len(pts) - 1):
        h0 = math.atan2(pts[i].y - pts[i - 1].y, pts[i].x - pts[i - 1].x)
        h1 = math.atan2(pts[i + 1].y - pts[i].y, pts[i + 1].x - pts[i].x)
        turn += abs(normalize_angle(h1 - h0))
    return turn / total


def closest_arclength(p: Polyline, x: float, y: float) -> tuple[float, float]:
    """Arc length of the point on ``p`` nearest to (x, y), and that distance.

    Ties resolve to the smallest arc length.
    """
    cums = cumulative_arclengths(p.points)
    best_s = 0.0
    best_d = math.inf
    for i in range(len(p.points) - 1):
        a, b = p.points[i], p.points[i + 1]
        vx, vy = b.x - a.x, b.y - a.y
        seg2 = vx * vx + vy * vy
        t = ((x - a.x) * vx + (y - a.y) * vy) / seg2
        t = min(1.0, max(0.0, t))
        px, py = a.x + t * vx, a.y + t * vy
        d = math.hypot(x - px, y - py)
        if d < best_d - 1e-12:
            best_d = d
            best_s = cums[i] + t * math.sqrt(seg2)
    return best_s, best_d


def point_to_chain_distance(points: Sequence[Waypoint], x: float, y: float) -> float:
    """Distance from (x, y) to a waypoint chain; tolerates single-point chains."""
    if len(points) == 1:
        return math.hypot(x - points[0].x, y - points[0].y)
    best = math.inf
    for i in range(len(points) - 1):
        a, b = points[i], points[i + 1]
        vx, vy = b.x - a.x, b.y - a.y
        seg2 = vx * vx + vy * vy
        if seg2 == 0.0:
            d = math.hypot(x - a.x, y - a.y)
        else:
            t = min(1.0, max(0.0, ((x - a.x) * vx + (y - a.y) * vy) / seg2))
            d = math.hypot(x - (a.x + t * vx), y - (a.y + t * vy))
        best = min(best, d)
    return best


def trajectory_l2(a: Trajectory, b: Trajectory) -> float:
    """Mean pointwise Euclidean distance between two equal-shape trajectories."""
    if a.dt != b.dt or len(a) != len(b):
        raise ShapeMismatch(
            f"trajectories differ in shape: dt {a.dt} vs {b.dt}, len {len(a)} vs {len(b)}"
        )
    acc = 0.0
    for pa, pb in zip(a.points, b.points):
        acc += math.hypot(pa.x - pb.x, pa.y - pb.y)
    return acc / len(a)
