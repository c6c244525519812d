"""Automated chain-of-thought labeling from ground-truth trajectories.

Produces a four-part rationale: scene description, critical objects with BEV
coordinates, per-object behavior sentences, and a high-level driving decision
drawn from 12 categories (4 speed actions x 3 lateral actions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Sequence

from .codec import Box3D, format_coord
from .errors import InvalidScenario
from .geometry import Trajectory, Waypoint, normalize_angle, point_to_chain_distance

if TYPE_CHECKING:  # pragma: no cover
    from .synth import ScenarioLog


class SpeedAction(Enum):
    KEEP_SPEED = "keep_speed"
    ACCELERATE = "accelerate"
    DECELERATE = "decelerate"
    STOP = "stop"


class LateralAction(Enum):
    STRAIGHT = "straight"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class MetaDecision:
    """One of the 12 high-level driving decisions (speed x lateral)."""

    speed_action: SpeedAction
    lateral_action: LateralAction

    def to_json_dict(self) -> dict:
        return {"speed_action": self.speed_action.value, "lateral_action": self.lateral_action.value}


@dataclass(frozen=True)
class MetaDecisionConfig:
    """Thresholds of the trajectory-analysis heuristic."""

    speed_delta: float = 1.0          # m/s change that counts as accel/decel
    stop_speed: float = 0.5           # m/s below which the ego is stopping
    heading_delta: float = math.radians(15.0)  # net turn that counts as left/right

    def __post_init__(self):
        if self.speed_delta <= 0 or self.stop_speed <= 0 or self.heading_delta <= 0:
            raise ValueError("all meta-decision thresholds must be positive")


@dataclass(frozen=True)
class CriticalObjectConfig:
    corridor_halfwidth: float = 3.0   # meters from the future path
    max_count: int = 5

    def __post_init__(self):
        if self.corridor_halfwidth <= 0 or self.max_count <= 0:
            raise ValueError("critical-object config values must be positive")


@dataclass(frozen=True)
class CriticalObject:
    """An agent near the planned path; rank 1 is the closest."""

    box: Box3D
    rank: int
    min_gap: float


@dataclass(frozen=True)
class Rationale:
    scene_description: str
    critical_objects: tuple[CriticalObject, ...]
    behavior_descriptions: tuple[str, ...]
    meta_decision: MetaDecision

    def to_text(self) -> str:
        """Serialize as exactly 4 newline-separated sections, R1 through R4."""
        if self.critical_objects:
            listing = ", ".join(
                f"{c.box.cls} at [{format_coord(c.box.x)},{format_coord(c.box.y)}]"
                for c in self.critical_objects
            )
            r2 = f"Critical objects: {listing}."
            r3 = " ".join(self.behavior_descriptions)
        else:
            r2 = "Critical objects: none."
            r3 = "Critical object behavior: none."
        r4 = decision_sentence(self.meta_decision)
        return "\n".join([self.scene_description, r2, r3, r4])

    def to_json_dict(self) -> dict:
        return {
            "scene_description": self.scene_description,
            "critical_objects": [
                {"box": c.box.to_json_dict(), "rank": c.rank, "min_gap": c.min_gap}
                for c in self.critical_objects
            ],
            "behavior_descriptions": list(self.behavior_descriptions),
            "meta_decision": self.meta_decision.to_json_dict(),
        }


_SPEED_PHRASES = {
    SpeedAction.KEEP_SPEED: "keep my current speed",
    SpeedAction.ACCELERATE: "accelerate",
    SpeedAction.DECELERATE: "slow down",
    SpeedAction.STOP: "come to a stop",
}
_LATERAL_PHRASES = {
    LateralAction.STRAIGHT: "continue straight",
    LateralAction.LEFT: "turn left",
    LateralAction.RIGHT: "turn right",
}


def decision_sentence(decision: MetaDecision) -> str:
    return f"I should {_SPEED_PHRASES[decision.speed_action]} and {_LATERAL_PHRASES[decision.lateral_action]}."


def _step_speeds(gt: Trajectory) -> list[float]:
    pts = gt.points
    return [
        math.hypot(b.x - a.x, b.y - a.y) / gt.dt
        for a, b in zip(pts, pts[1:])
    ]


def meta_decision(gt: Trajectory, cfg: MetaDecisionConfig = MetaDecisionConfig()) -> MetaDecision:
    """Classify a ground-truth trajectory into one of the 12 decision categories.

    Speed action compares the mean speed of the first third of steps against
    the last third; lateral action thresholds the net heading change between
    the first and last moving segments.
    """
    if len(gt) < 3:
        raise InvalidScenario(f"meta decision needs >= 3 points, got {len(gt)}")
    speeds = _step_speeds(gt)
    m = len(speeds)
    k = max(1, m // 3)
    v0 = sum(speeds[:k]) / k
    v1 = sum(speeds[-k:]) / k

    if v1 < cfg.stop_speed:
        speed = SpeedAction.STOP
    elif v1 - v0 > cfg.speed_delta:
        speed = SpeedAction.ACCELERATE
    elif v0 - v1 > cfg.speed_delta:
        speed = SpeedAction.DECELERATE
    else:
        speed = SpeedAction.KEEP_SPEED

    # headings of the first and last segments long enough to define a direction
    pts = gt.points
    min_seg = 1e-6
    first_heading = None
    last_heading = None
    for a, b in zip(pts, pts[1:]):
        if math.hypot(b.x - a.x, b.y - a.y) > min_seg:
            h = math.atan2(b.y - a.y, b.x - a.x)
            if first_heading is None:
                first_heading = h
            last_heading = h
    if first_heading is None:
        dpsi = 0.0
    else:
        dpsi = normalize_angle(last_heading - first_heading)

    if dpsi > cfg.heading_delta:
        lateral = LateralAction.LEFT
    elif dpsi < -cfg.heading_delta:
        lateral = LateralAction.RIGHT
    else:
        lateral = LateralAction.STRAIGHT
    return MetaDecision(speed, lateral)


def critical_objects(
    ego_future: Trajectory,
    boxes: Sequence[Box3D],
    cfg: CriticalObjectConfig = CriticalObjectConfig(),
) -> list[CriticalObject]:
    """Rank agents whose centers come within the corridor of the future path.

    The path is the future waypoint chain prepended with the current position
    (the ego frame origin). Ranking is by closest approach, ties by range.
    """
    chain: list[Waypoint] = [Waypoint(0.0, 0.0), *ego_future.points]
    scored = []
    for i, b in enumerate(boxes):
        gap = point_to_chain_distance(chain, b.x, b.y)
        if gap <= cfg.corridor_halfwidth:
            scored.append((gap, b.range, i, b))
    scored.sort(key=lambda e: (e[0], e[1], e[2]))
    return [
        CriticalObject(box=b, rank=r + 1, min_gap=gap)
        for r, (gap, _, _, b) in enumerate(scored[: cfg.max_count])
    ]


def _behavior_sentence(c: CriticalObject, speed: float | None) -> str:
    b = c.box
    if speed is None:
        motion = "near my path"
    elif speed < 0.5:
        motion = "stationary"
    else:
        motion = "moving"
    same_dir = abs(b.theta) <= math.pi / 2
    direction = "the same direction as me" if same_dir else "the opposite direction"
    side = "ahead of me" if b.x > 0 else "behind me"
    return f"The {b.cls} {side} is {motion}, facing {direction}."


def build_rationale(
    scenario: "ScenarioLog",
    criticals: Sequence[CriticalObject],
    decision: MetaDecision,
) -> Rationale:
    meta = scenario.metadata
    scene = (
        f"It is {meta['time_of_day']}. "
        f"The road is a {meta['lane_count']}-lane {meta['road_type']}."
    )
    behaviors = []
    for c in criticals:
        speed = None
        try:
            speed = scenario.box_speeds[scenario.boxes.index(c.box)]
        except (ValueError, IndexError):
            pass
        behaviors.append(_behavior_sentence(c, speed))
    return Rationale(scene, tuple(criticals), tuple(behaviors), decision)


def compose_rationale(
    scenario: "ScenarioLog",
    criticals: Sequence[CriticalObject],
    decision: MetaDecision,
) -> str:
    """Templated rationale text: sections R1..R4, one line each."""
    return build_rationale(scenario, criticals, decision).to_text()
