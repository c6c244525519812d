"""Synthetic driving scenarios and trivial baseline planners.

Scenarios are generated deterministically from (config, seed). Ego history
and future are stored in the ego frame of the current pose (history ends at
the origin, future starts one step later); the roadgraph is stored in the
global frame; boxes are stored in the vehicle frame. See docs/format.md.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
import numpy as np

from .codec import Box3D, IntentCommand, RoadGraph
from .errors import InvalidScenario
from .geometry import (
    Polyline,
    Pose2D,
    Trajectory,
    transform_to_global,
)
from .rationale import LateralAction, MetaDecisionConfig, meta_decision

LANE_WIDTH = 3.5

_ROAD_TYPES = ("city street", "residential street", "highway", "rural road")
_TIMES_OF_DAY = ("day", "night", "dusk", "dawn")

#: Intent commands compatible with each realized lateral action.
INTENT_LATERAL = {
    IntentCommand.GO_STRAIGHT: LateralAction.STRAIGHT,
    IntentCommand.LANE_CHANGE_LEFT: LateralAction.STRAIGHT,
    IntentCommand.LANE_CHANGE_RIGHT: LateralAction.STRAIGHT,
    IntentCommand.TURN_LEFT: LateralAction.LEFT,
    IntentCommand.U_TURN: LateralAction.LEFT,
    IntentCommand.TURN_RIGHT: LateralAction.RIGHT,
}


@dataclass(frozen=True)
class BlockageConfig:
    """Thresholds of the temporary-blockage labeler."""

    lookahead: float = 40.0
    coverage_fraction: float = 0.6
    stationary_speed: float = 0.2
    lane_width: float = LANE_WIDTH

    def __post_init__(self):
        if self.lookahead <= 0 or self.stationary_speed <= 0 or self.lane_width <= 0:
            raise ValueError("blockage config values must be positive")
        if not (0.0 < self.coverage_fraction <= 1.0):
            raise ValueError(f"coverage_fraction must be in (0, 1], got {self.coverage_fraction}")


@dataclass(frozen=True)
class ScenarioLog:
    """One self-contained driving example."""

    id: str
    ego_pose: Pose2D
    ego_history: Trajectory
    ego_future: Trajectory
    intent: IntentCommand
    boxes: tuple[Box3D, ...]
    box_speeds: tuple[float, ...]
    roadgraph: RoadGraph
    metadata: dict
    blockage: bool

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "box_speeds", tuple(self.box_speeds))
        if self.ego_history.dt != self.ego_future.dt:
            raise InvalidScenario("history and future must share dt")
        if len(self.box_speeds) != len(self.boxes):
            raise InvalidScenario("box_speeds must align with boxes")

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "dt": self.ego_history.dt,
            "ego_pose": {"x": self.ego_pose.x, "y": self.ego_pose.y, "heading": self.ego_pose.heading},
            "ego_history": self.ego_history.coords(),
            "ego_future": self.ego_future.coords(),
            "intent": self.intent.value,
            "boxes": [b.to_json_dict() for b in self.boxes],
            "box_speeds": list(self.box_speeds),
            "roadgraph": [pl.coords() for pl in self.roadgraph.polylines],
            "metadata": dict(self.metadata),
            "blockage": self.blockage,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ScenarioLog":
        dt = d["dt"]
        pose = d["ego_pose"]
        return cls(
            id=d["id"],
            ego_pose=Pose2D(pose["x"], pose["y"], pose["heading"]),
            ego_history=Trajectory.from_xy(dt, d["ego_history"]),
            ego_future=Trajectory.from_xy(dt, d["ego_future"]),
            intent=IntentCommand(d["intent"]),
            boxes=tuple(Box3D.from_json_dict(b) for b in d["boxes"]),
            box_speeds=tuple(float(v) for v in d["box_speeds"]),
            roadgraph=RoadGraph(tuple(Polyline.from_xy(pl) for pl in d["roadgraph"])),
            metadata=dict(d["metadata"]),
            blockage=bool(d["blockage"]),
        )


@dataclass(frozen=True)
class GeneratorConfig:
    """Scenario generator knobs; ``preset`` builds the two protocol shapes."""

    dt: float = 0.5
    history_steps: int = 2
    future_steps: int = 16
    lane_count_range: tuple[int, int] = (1, 4)
    agent_count_range: tuple[int, int] = (0, 5)
    speed_range: tuple[float, float] = (3.0, 12.0)
    turn_radius_range: tuple[float, float] = (10.0, 25.0)
    lane_forward: float = 120.0
    lane_back: float = 40.0
    maneuvers: tuple[str, ...] = (
        "straight", "turn_left", "turn_right", "lane_change_left", "lane_change_right",
    )
    speed_profiles: tuple[str, ...] = ("constant", "accel", "decel", "stop")
    blockage_rate: float = 0.2
    # snap speeds so that speed * dt has at most 2 decimals and text
    # quantization is lossless on constant-velocity scenarios
    lattice_speeds: bool = True

    def __post_init__(self):
        if self.dt <= 0 or self.history_steps < 2 or self.future_steps < 1:
            raise ValueError("need dt > 0, history_steps >= 2, future_steps >= 1")

    @classmethod
    def preset(cls, name: str, **overrides) -> "GeneratorConfig":
        if name == "womd":
            base = cls(dt=0.5, history_steps=2, future_steps=16)
        elif name == "nuscenes":
            base = cls(dt=0.5, history_steps=4, future_steps=6)
        else:
            raise ValueError(f"unknown preset {name!r} (expected 'womd' or 'nuscenes')")
        return replace(base, **overrides) if overrides else base


class _Path:
    """Ego path in the ego frame, parameterized by signed arc length."""

    def __init__(self, maneuver: str, radius: float, lane_change_dist: float = 30.0):
        self.maneuver = maneuver
        self.radius = radius
        self.lc_dist = lane_change_dist

    def point(self, s: float) -> tuple[float, float]:
        if s <= 0.0 or self.maneuver == "straight":
            return (s, 0.0)
        if self.maneuver in ("turn_left", "turn_right"):
            sign = 1.0 if self.maneuver == "turn_left" else -1.0
            r = self.radius
            arc = r * math.pi / 2.0
            if s <= arc:
                a = s / r
                return (r * math.sin(a), sign * r * (1.0 - math.cos(a)))
            return (r, sign * (r + (s - arc)))
        if self.maneuver in ("lane_change_left", "lane_change_right"):
            sign = 1.0 if self.maneuver == "lane_change_left" else -1.0
            u = min(1.0, s / self.lc_dist)
            return (s, sign * LANE_WIDTH * (3.0 * u * u - 2.0 * u ** 3))
        raise ValueError(f"unknown maneuver {self.maneuver!r}")

    def heading(self, s: float) -> float:
        eps = 1e-3
        x0, y0 = self.point(s - eps)
        x1, y1 = self.point(s + eps)
        return math.atan2(y1 - y0, x1 - x0)

    def lane_polyline(self, back: float, forward: float) -> Polyline:
        """Lane geometry along the path: straight spans stay 2-point, arcs densify."""
        if self.maneuver in ("turn_left", "turn_right"):
            pts = [(-back, 0.0), (0.0, 0.0)]
            r = self.radius
            arc = r * math.pi / 2.0
            n = max(2, int(math.ceil(arc / (r * math.radians(5.0)))))
            for i in range(1, n + 1):
                pts.append(self.point(arc * i / n))
            end = self.point(arc)
            sign = 1.0 if self.maneuver == "turn_left" else -1.0
            pts.append((end[0], end[1] + sign * max(10.0, forward - arc)))
            return Polyline.from_xy(pts)
        # lane-change scenarios keep a straight source lane; the target lane
        # is one of the parallel lanes
        return Polyline.from_xy([(-back, 0.0), (forward, 0.0)])


def _future_speeds(profile: str, v0: float, n: int, dt: float) -> list[float]:
    if profile == "constant":
        return [v0] * n
    if profile == "accel":
        return [min(v0 + 1.2 * (j + 1) * dt, 18.0) for j in range(n)]
    if profile == "decel":
        return [max(v0 - 1.2 * (j + 1) * dt, 0.8) for j in range(n)]
    if profile == "stop":
        rate = v0 / max(0.6 * n * dt, dt)
        return [max(v0 - rate * (j + 1) * dt, 0.0) for j in range(n)]
    raise ValueError(f"unknown speed profile {profile!r}")


def _snap_speed(v: float) -> float:
    # multiples of 0.02 keep v * dt on the 0.01 grid for dt = 0.5
    return round(v * 50.0) / 50.0


def gen_scenario(cfg: GeneratorConfig, seed: int) -> ScenarioLog:
    """Build one deterministic scenario from the config and seed."""
    rng = random.Random(seed)
    maneuver = rng.choice(cfg.maneuvers)
    profiles = cfg.speed_profiles
    if maneuver in ("turn_left", "turn_right"):
        turn_ok = tuple(p for p in profiles if p in ("constant", "accel"))
        profiles = turn_ok or ("constant",)
    profile = rng.choice(profiles)

    v0 = rng.uniform(*cfg.speed_range)
    if cfg.lattice_speeds:
        v0 = _snap_speed(v0)
    radius = rng.uniform(*cfg.turn_radius_range)
    path = _Path(maneuver, radius)
    dt = cfg.dt

    # history: constant past speed, last point is the current position
    step = v0 * dt
    hist_pts = [path.point(-(cfg.history_steps - 1 - i) * step) for i in range(cfg.history_steps)]
    history = Trajectory.from_xy(dt, hist_pts)

    # future stations; the constant profile uses exact multiples of the step
    if profile == "constant" and maneuver == "straight":
        fut_pts = [((j + 1) * step, 0.0) for j in range(cfg.future_steps)]
    else:
        speeds = _future_speeds(profile, v0, cfg.future_steps, dt)
        stations = []
        s = 0.0
        for v in speeds:
            s += v * dt
            stations.append(s)
        fut_pts = [path.point(s) for s in stations]
    future = Trajectory.from_xy(dt, fut_pts)

    # roadgraph: ego lane plus parallel same-direction lanes, in ego frame first
    lane_count = rng.randint(*cfg.lane_count_range)
    ego_lanes = [path.lane_polyline(cfg.lane_back, cfg.lane_forward)]
    for k in range(1, lane_count):
        side = 1.0 if k % 2 == 1 else -1.0
        offset = side * LANE_WIDTH * ((k + 1) // 2)
        ego_lanes.append(Polyline.from_xy([(-cfg.lane_back, offset), (cfg.lane_forward, offset)]))

    ego_pose = Pose2D(rng.uniform(-80.0, 80.0), rng.uniform(-80.0, 80.0), rng.uniform(-math.pi, math.pi))
    global_lanes = tuple(
        Polyline(tuple(transform_to_global(pl.points, ego_pose))) for pl in ego_lanes
    )
    roadgraph = RoadGraph(global_lanes)

    # agents in the vehicle frame
    boxes: list[Box3D] = []
    speeds_out: list[float] = []
    n_agents = rng.randint(*cfg.agent_count_range)
    lane_offsets = [0.0] + [
        (1.0 if k % 2 == 1 else -1.0) * LANE_WIDTH * ((k + 1) // 2) for k in range(1, lane_count)
    ]
    for _ in range(n_agents):
        cls = rng.choices(
            ("vehicle", "pedestrian", "cyclist", "motorcyclist", "sign", "other"),
            weights=(0.45, 0.2, 0.1, 0.1, 0.08, 0.07),
        )[0]
        station = rng.uniform(6.0, 70.0)
        off = rng.choice(lane_offsets)
        if cls == "pedestrian":
            off += rng.choice((-1.0, 1.0)) * (LANE_WIDTH / 2.0 + 1.0)
        dims = {
            "vehicle": (4.6, 2.0, 1.6), "pedestrian": (0.6, 0.6, 1.7),
            "cyclist": (1.8, 0.6, 1.6), "motorcyclist": (2.1, 0.8, 1.5),
            "sign": (0.3, 0.8, 1.2), "other": (1.0, 1.0, 1.0),
        }[cls]
        l = dims[0] * rng.uniform(0.9, 1.1)
        w = dims[1] * rng.uniform(0.9, 1.1)
        h = dims[2] * rng.uniform(0.9, 1.1)
        opposite = cls in ("vehicle", "cyclist", "motorcyclist") and rng.random() < 0.2
        theta = math.pi if opposite else 0.0
        if cls in ("sign",):
            speed = 0.0
        elif cls == "pedestrian":
            speed = rng.uniform(0.0, 1.5)
        else:
            speed = rng.uniform(1.0, v0 + 2.0) if rng.random() < 0.6 else 0.0
        boxes.append(Box3D(station, off, h / 2.0, l, w, h, theta, cls))
        speeds_out.append(speed)

    # temporary blockage: a row of cones across the ego lane
    if cfg.agent_count_range[1] > 0 and rng.random() < cfg.blockage_rate:
        sb = rng.uniform(12.0, 35.0)
        cx, cy = path.point(sb)
        hdg = path.heading(sb)
        nx, ny = -math.sin(hdg), math.cos(hdg)
        for lat in (-1.4, -0.7, 0.0, 0.7, 1.4):
            boxes.append(Box3D(cx + lat * nx, cy + lat * ny, 0.35, 0.4, 0.5, 0.7, hdg, "other"))
            speeds_out.append(0.0)

    # intent consistent with the realized trajectory
    intent = {
        "straight": IntentCommand.GO_STRAIGHT,
        "turn_left": IntentCommand.TURN_LEFT,
        "turn_right": IntentCommand.TURN_RIGHT,
        "lane_change_left": IntentCommand.LANE_CHANGE_LEFT,
        "lane_change_right": IntentCommand.LANE_CHANGE_RIGHT,
    }[maneuver]
    if cfg.future_steps >= 3:
        realized = meta_decision(future, MetaDecisionConfig()).lateral_action
        if INTENT_LATERAL[intent] != realized:
            intent = {
                LateralAction.LEFT: IntentCommand.TURN_LEFT,
                LateralAction.RIGHT: IntentCommand.TURN_RIGHT,
                LateralAction.STRAIGHT: IntentCommand.GO_STRAIGHT,
            }[realized]

    metadata = {
        "time_of_day": rng.choice(_TIMES_OF_DAY),
        "road_type": rng.choice(_ROAD_TYPES),
        "lane_count": lane_count,
    }

    log = ScenarioLog(
        id=f"scn-{seed:08d}",
        ego_pose=ego_pose,
        ego_history=history,
        ego_future=future,
        intent=intent,
        boxes=tuple(boxes),
        box_speeds=tuple(speeds_out),
        roadgraph=roadgraph,
        metadata=metadata,
        blockage=False,
    )
    return replace(log, blockage=blockage_label(log, BlockageConfig()))


def gen_scenarios(cfg: GeneratorConfig, count: int, seed: int) -> list[ScenarioLog]:
    """Batch generation: scenario i uses seed ``seed + i``."""
    return [gen_scenario(cfg, seed + i) for i in range(count)]


def constant_velocity_planner(history: Trajectory, n_steps: int) -> Trajectory:
    """Extrapolate the last history step velocity, anchored at the last point."""
    if len(history) < 2:
        raise InvalidScenario("constant-velocity planner needs >= 2 history points")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    last = history.points[-1]
    prev = history.points[-2]
    dx = last.x - prev.x
    dy = last.y - prev.y
    pts = [(last.x + (j + 1) * dx, last.y + (j + 1) * dy) for j in range(n_steps)]
    return Trajectory.from_xy(history.dt, pts)


def noisy_oracle_planner(gt: Trajectory, sigma: float, seed: int) -> Trajectory:
    """Ground truth plus i.i.d. zero-mean gaussian noise per coordinate."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=(len(gt), 2))
    pts = [(p.x + noise[i, 0], p.y + noise[i, 1]) for i, p in enumerate(gt.points)]
    return Trajectory.from_xy(gt.dt, pts)


def noisy_candidate_set(gt: Trajectory, count: int, sigma: float, seed: int):
    """Candidate set of ``count`` noisy-oracle samples; candidate j uses seed+j."""
    from .aggregation import CandidateSet

    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return CandidateSet(
        tuple(noisy_oracle_planner(gt, sigma, seed + j) for j in range(count)),
        source_seed=seed,
    )


def blockage_label(s: ScenarioLog, cfg: BlockageConfig = BlockageConfig()) -> bool:
    """True iff stationary agents ahead cover most of the lane width somewhere.

    Footprints are treated axis-aligned in the ego frame; a station is blocked
    when merged y-extents of stationary boxes straddling it cover at least
    cfg.coverage_fraction of the lane width.
    """
    half = cfg.lane_width / 2.0
    stationary = [
        b for b, v in zip(s.boxes, s.box_speeds)
        if v < cfg.stationary_speed and 0.0 < b.x <= cfg.lookahead and abs(b.y) <= half + b.w
    ]
    if not stationary:
        return False
    for probe in stationary:
        station = probe.x
        intervals = []
        for b in stationary:
            if b.x - b.l / 2.0 <= station <= b.x + b.l / 2.0:
                lo = max(b.y - b.w / 2.0, -half)
                hi = min(b.y + b.w / 2.0, half)
                if hi > lo:
                    intervals.append((lo, hi))
        if not intervals:
            continue
        intervals.sort()
        covered = 0.0
        cur_lo, cur_hi = intervals[0]
        for lo, hi in intervals[1:]:
            if lo > cur_hi:
                covered += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        covered += cur_hi - cur_lo
        if covered >= cfg.coverage_fraction * cfg.lane_width:
            return True
    return False
