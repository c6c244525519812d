"""Bidirectional text grammars for trajectories, 3D boxes, and roadgraphs.

All coordinates render with exactly two decimals (round-half-away-from-zero);
parsing is lenient about decimal count and whitespace. The exact token-level
grammars are documented in docs/grammar.md.
"""

from __future__ import annotations

import math
import random
import re
from bisect import bisect_right
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Sequence

from .errors import (
    DegeneratePolyline,
    EncodeError,
    InvalidGeometry,
    ParseError,
    TruncationError,
    UnknownClass,
)
from .geometry import (
    ORIGIN_POSE,
    Polyline,
    Pose2D,
    Trajectory,
    Waypoint,
    arc_length_resample,
    closest_arclength,
    mean_abs_curvature,
    normalize_angle,
    point_at_arclength,
    polyline_length,
    transform_to_ego,
)

BOX_CLASSES = ("vehicle", "pedestrian", "cyclist", "motorcyclist", "sign", "other")

PAD_TOKEN = "invalid"
VALID_TOKEN = "valid"

#: Point count used when dynamic sampling is disabled.
FIXED_SAMPLE_POINTS = 5

_TWO_PLACES = Decimal("0.01")
_FLOAT_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_WS_RE = re.compile(r"\s*")


def format_coord(v: float) -> str:
    """Render a number with exactly 2 decimals, ties rounding away from zero."""
    if not math.isfinite(v):
        raise EncodeError(f"cannot encode non-finite value {v!r}")
    try:
        q = Decimal(repr(v)).quantize(_TWO_PLACES, rounding=ROUND_HALF_UP)
    except ArithmeticError:
        raise EncodeError(f"value {v!r} too large for the coordinate grammar") from None
    if q.is_zero():
        q = abs(q)
    return str(q)


def quantize_coord(v: float) -> float:
    """The float a coordinate becomes after an encode/decode round trip."""
    return float(format_coord(v))


class IntentCommand(Enum):
    """Router-level navigation directive; values are the canonical text."""

    GO_STRAIGHT = "go straight"
    TURN_LEFT = "turn left"
    TURN_RIGHT = "turn right"
    U_TURN = "u-turn"
    LANE_CHANGE_LEFT = "lane change left"
    LANE_CHANGE_RIGHT = "lane change right"


def parse_intent(text: str) -> IntentCommand:
    try:
        return IntentCommand(text.strip().lower())
    except ValueError:
        raise ParseError(f"unknown intent command {text!r}") from None


@dataclass(frozen=True)
class Box3D:
    """7D oriented box with class label, centered in the vehicle frame.

    theta is normalized to (-pi, pi] on construction.
    """

    x: float
    y: float
    z: float
    l: float
    w: float
    h: float
    theta: float
    cls: str

    def __post_init__(self):
        for name in ("x", "y", "z", "l", "w", "h", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidGeometry(f"non-finite box field {name}")
        if self.l <= 0 or self.w <= 0 or self.h <= 0:
            raise InvalidGeometry(f"box dimensions must be positive: l={self.l} w={self.w} h={self.h}")
        if self.cls not in BOX_CLASSES:
            raise InvalidGeometry(f"class {self.cls!r} not in vocabulary {BOX_CLASSES}")
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def range(self) -> float:
        """Planar range sqrt(x^2 + y^2); the depth used for ordering."""
        return math.hypot(self.x, self.y)

    def to_json_dict(self) -> dict:
        return {
            "x": self.x, "y": self.y, "z": self.z,
            "l": self.l, "w": self.w, "h": self.h,
            "theta": self.theta, "cls": self.cls,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Box3D":
        return cls(d["x"], d["y"], d["z"], d["l"], d["w"], d["h"], d["theta"], d["cls"])


@dataclass(frozen=True)
class RoadGraph:
    """Set of drivable-lane polylines."""

    polylines: tuple[Polyline, ...]

    def __post_init__(self):
        object.__setattr__(self, "polylines", tuple(self.polylines))

    def __len__(self) -> int:
        return len(self.polylines)


@dataclass(frozen=True)
class RoadgraphCodecConfig:
    """Knobs of the roadgraph target construction.

    ``interval`` is the base sample spacing; curvier lanes are sampled denser
    by interval / (1 + curvature_gain * mean|curvature|). ``drop_excess_lanes``
    selects lenient truncation (farthest lanes dropped silently) over raising.
    """

    interval: float = 2.0
    curvature_gain: float = 1.0
    max_polylines: int = 16
    max_points_per_polyline: int = 24
    bin_edges: tuple[float, ...] = (20.0, 50.0)
    shuffle_within_bins: bool = True
    ego_origin_aligned: bool = True
    dynamic_sampling: bool = True
    drop_excess_lanes: bool = False

    def __post_init__(self):
        if self.interval <= 0:
            raise ValueError(f"interval must be positive, got {self.interval}")
        if self.max_polylines < 1:
            raise ValueError(f"max_polylines must be >= 1, got {self.max_polylines}")
        if self.max_points_per_polyline < 2:
            raise ValueError(f"max_points_per_polyline must be >= 2, got {self.max_points_per_polyline}")
        if any(b <= a for a, b in zip(self.bin_edges, self.bin_edges[1:])):
            raise ValueError(f"bin_edges must be strictly increasing, got {self.bin_edges}")


# ---------------------------------------------------------------------------
# trajectory grammar: "[X.XX,Y.YY] [X.XX,Y.YY] ..."
# ---------------------------------------------------------------------------

def encode_trajectory(t: Trajectory) -> str:
    return " ".join(f"[{format_coord(p.x)},{format_coord(p.y)}]" for p in t.points)


def _skip_ws(s: str, pos: int) -> int:
    return _WS_RE.match(s, pos).end()


def _expect(s: str, pos: int, ch: str) -> int:
    if pos >= len(s) or s[pos] != ch:
        found = s[pos] if pos < len(s) else "end of input"
        raise ParseError(f"expected {ch!r}, found {found!r}", offset=pos)
    return pos + 1


def _parse_float(s: str, pos: int) -> tuple[float, int]:
    m = _FLOAT_RE.match(s, pos)
    if m is None:
        raise ParseError(f"expected a number at offset {pos}", offset=pos)
    return float(m.group()), m.end()


def decode_trajectory(s: str, dt: float) -> Trajectory:
    """Parse waypoint text back into a Trajectory with the given time step."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    pos = _skip_ws(s, 0)
    if pos >= len(s):
        raise ParseError("empty trajectory text", offset=0)
    pts: list[Waypoint] = []
    while pos < len(s):
        start = pos
        pos = _expect(s, pos, "[")
        pos = _skip_ws(s, pos)
        x, pos = _parse_float(s, pos)
        pos = _skip_ws(s, pos)
        pos = _expect(s, pos, ",")
        pos = _skip_ws(s, pos)
        y, pos = _parse_float(s, pos)
        pos = _skip_ws(s, pos)
        pos = _expect(s, pos, "]")
        try:
            pts.append(Waypoint(x, y))
        except InvalidGeometry as exc:
            raise ParseError(str(exc), offset=start) from None
        pos = _skip_ws(s, pos)
    return Trajectory(dt, tuple(pts))


# ---------------------------------------------------------------------------
# box grammar: "x y z l w h theta cls; x y z l w h theta cls"
# ---------------------------------------------------------------------------

def encode_boxes(boxes: Sequence[Box3D]) -> str:
    """Render boxes sorted ascending by planar range (stable for ties)."""
    ordered = sorted(boxes, key=lambda b: b.range)
    parts = []
    for b in ordered:
        nums = " ".join(format_coord(v) for v in (b.x, b.y, b.z, b.l, b.w, b.h, b.theta))
        parts.append(f"{nums} {b.cls}")
    return "; ".join(parts)


def decode_boxes(s: str) -> list[Box3D]:
    out: list[Box3D] = []
    idx = 0
    for seg in s.split(";"):
        if not seg.strip():
            continue
        fields = seg.split()
        if len(fields) != 8:
            raise ParseError(f"box {idx}: expected 8 fields, got {len(fields)}", index=idx)
        try:
            nums = [float(f) for f in fields[:7]]
        except ValueError:
            raise ParseError(f"box {idx}: malformed number", index=idx) from None
        cls = fields[7]
        if cls not in BOX_CLASSES:
            raise UnknownClass(cls, index=idx)
        try:
            out.append(Box3D(*nums, cls))
        except InvalidGeometry as exc:
            raise ParseError(f"box {idx}: {exc}", index=idx) from None
        idx += 1
    return out


# ---------------------------------------------------------------------------
# roadgraph grammar: "(x,y and x,y and invalid) valid; ..."
# ---------------------------------------------------------------------------

def _dedupe_quantized(points: Sequence[Waypoint]) -> list[Waypoint]:
    """Drop interior points that collapse onto a neighbor at 2-decimal precision."""
    qs = [(format_coord(p.x), format_coord(p.y)) for p in points]
    kept = [points[0]]
    kept_q = qs[0]
    for p, q in zip(points[1:-1], qs[1:-1]):
        if q != kept_q:
            kept.append(p)
            kept_q = q
    if qs[-1] == kept_q:
        if len(kept) == 1:
            raise DegeneratePolyline("polyline collapses to a single point at text precision")
        kept[-1] = points[-1]
    else:
        kept.append(points[-1])
    return kept


def dynamic_sample_polyline(p: Polyline, ego: Pose2D, cfg: RoadgraphCodecConfig) -> Polyline:
    """Pick codec-ready sample points along a lane.

    With dynamic sampling the spacing shrinks on curvy lanes; with it off, the
    lane is reduced to FIXED_SAMPLE_POINTS evenly spaced points. The point
    count never exceeds cfg.max_points_per_polyline.
    """
    total = polyline_length(p)
    if total <= 1e-12:
        raise DegeneratePolyline("cannot sample a zero-length polyline")
    p_max = cfg.max_points_per_polyline

    if not cfg.dynamic_sampling:
        n = min(FIXED_SAMPLE_POINTS, p_max)
        pts = [point_at_arclength(p, i * total / (n - 1)) for i in range(n)]
        return Polyline(tuple(_dedupe_quantized(pts)))

    kappa = mean_abs_curvature(p)
    eff = cfg.interval / (1.0 + cfg.curvature_gain * kappa)

    anchor_source = 0.0
    if cfg.ego_origin_aligned:
        anchor_source, _ = closest_arclength(p, ego.x, ego.y)

    def sample(interval: float) -> Polyline:
        anchor = math.fmod(anchor_source, interval)
        return arc_length_resample(p, interval, anchor, min_separation=1e-9)

    out = sample(eff)
    if len(out) > p_max:
        # two pad slots cover anchor offset and endpoint inclusion
        eff = max(eff, total / (p_max - 2)) if p_max > 2 else 2.0 * total
        out = sample(eff)
        while len(out) > p_max:
            eff *= 1.25
            out = sample(eff)
    return Polyline(tuple(_dedupe_quantized(out.points)))


def _endpoint_key(pl: Polyline, ego: Pose2D) -> float:
    a, b = pl.points[0], pl.points[-1]
    return min(math.hypot(a.x - ego.x, a.y - ego.y), math.hypot(b.x - ego.x, b.y - ego.y))


def order_and_shuffle_polylines(
    rg: RoadGraph,
    ego: Pose2D,
    cfg: RoadgraphCodecConfig,
    rng_seed: int,
    training_mode: bool,
) -> list[Polyline]:
    """Order lanes by endpoint-distance bins; shuffle within bins when training.

    Evaluation mode sorts within each bin ascending by distance, so the full
    output is ascending by key; training mode permutes within bins with a
    generator seeded by ``rng_seed``.
    """
    entries = [(_endpoint_key(pl, ego), i, pl) for i, pl in enumerate(rg.polylines)]
    rng = random.Random(rng_seed)
    out: list[Polyline] = []
    for b in range(len(cfg.bin_edges) + 1):
        bucket = [e for e in entries if bisect_right(cfg.bin_edges, e[0]) == b]
        if training_mode and cfg.shuffle_within_bins:
            rng.shuffle(bucket)
        else:
            bucket.sort(key=lambda e: (e[0], e[1]))
        out.extend(e[2] for e in bucket)
    return out


def prepare_roadgraph(
    rg: RoadGraph,
    ego: Pose2D,
    cfg: RoadgraphCodecConfig,
    rng_seed: int,
    training_mode: bool,
) -> list[Polyline]:
    """The encode pipeline short of rendering: ego transform, sampling, ordering."""
    lanes = list(rg.polylines)
    if len(lanes) > cfg.max_polylines:
        if not cfg.drop_excess_lanes:
            raise TruncationError(len(lanes) - cfg.max_polylines)
        keyed = sorted(
            ((_endpoint_key(pl, ego), i) for i, pl in enumerate(lanes)),
            key=lambda e: (e[0], e[1]),
        )
        keep = sorted(i for _, i in keyed[: cfg.max_polylines])
        lanes = [lanes[i] for i in keep]
    ego_lanes = [Polyline(tuple(transform_to_ego(pl.points, ego))) for pl in lanes]
    sampled = [dynamic_sample_polyline(pl, ORIGIN_POSE, cfg) for pl in ego_lanes]
    return order_and_shuffle_polylines(RoadGraph(tuple(sampled)), ORIGIN_POSE, cfg, rng_seed, training_mode)


def render_roadgraph(prepared: Sequence[Polyline], cfg: RoadgraphCodecConfig) -> str:
    """Render already-prepared (ego-framed, sampled, ordered) lanes as text."""
    p_max = cfg.max_points_per_polyline
    clauses = []
    for pl in prepared:
        items = [f"{format_coord(p.x)},{format_coord(p.y)}" for p in pl.points]
        items.extend([PAD_TOKEN] * (p_max - len(items)))
        clauses.append("(" + " and ".join(items) + f") {VALID_TOKEN};")
    pad_clause = "(" + " and ".join([PAD_TOKEN] * p_max) + f") {PAD_TOKEN};"
    clauses.extend([pad_clause] * (cfg.max_polylines - len(prepared)))
    return " ".join(clauses)


def encode_roadgraph(
    rg: RoadGraph,
    ego: Pose2D,
    cfg: RoadgraphCodecConfig,
    rng_seed: int = 0,
    training_mode: bool = False,
) -> str:
    """Render a roadgraph as a fixed-shape padded text target.

    The output always holds exactly cfg.max_polylines clauses of exactly
    cfg.max_points_per_polyline point slots; unused slots carry the pad token.
    """
    return render_roadgraph(prepare_roadgraph(rg, ego, cfg, rng_seed, training_mode), cfg)


_CLAUSE_RE = re.compile(r"\(\s*([^()]*?)\s*\)\s*([A-Za-z]+)\s*;")
_POINT_ITEM_RE = re.compile(
    r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)\s*,\s*"
    r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
)


def decode_roadgraph(s: str) -> RoadGraph:
    """Parse roadgraph text, dropping pad slots and pad polylines."""
    polylines: list[Polyline] = []
    pos = _skip_ws(s, 0)
    idx = 0
    while pos < len(s):
        m = _CLAUSE_RE.match(s, pos)
        if m is None:
            raise ParseError(f"polyline {idx}: malformed clause (missing validity token?)",
                             offset=pos, index=idx)
        inner, validity = m.group(1), m.group(2)
        if validity not in (VALID_TOKEN, PAD_TOKEN):
            raise ParseError(f"polyline {idx}: bad validity token {validity!r}", index=idx)
        if validity == VALID_TOKEN:
            pts: list[Waypoint] = []
            items = re.split(r"\s+and\s+", inner) if inner else []
            for item in items:
                if item == PAD_TOKEN:
                    continue
                pm = _POINT_ITEM_RE.fullmatch(item)
                if pm is None:
                    raise ParseError(f"polyline {idx}: bad point item {item!r}", index=idx)
                try:
                    wp = Waypoint(float(pm.group(1)), float(pm.group(2)))
                except InvalidGeometry as exc:
                    raise ParseError(f"polyline {idx}: {exc}", index=idx) from None
                if pts and wp.x == pts[-1].x and wp.y == pts[-1].y:
                    continue
                pts.append(wp)
            if len(pts) < 2:
                raise DegeneratePolyline(f"polyline {idx} has fewer than 2 real points")
            polylines.append(Polyline(tuple(pts)))
        pos = _skip_ws(s, m.end())
        idx += 1
    return RoadGraph(tuple(polylines))
