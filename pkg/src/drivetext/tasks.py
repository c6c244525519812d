"""(prompt, target) text pairs per driving task.

Prompt wording is fixed and documented in docs/prompts.md; the detection and
blockage prompts carry their customary verbatim phrasings. Targets always
parse back through the matching decoder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .codec import (
    RoadgraphCodecConfig,
    encode_boxes,
    encode_roadgraph,
    encode_trajectory,
)
from .errors import InvalidScenario
from .rationale import (
    CriticalObjectConfig,
    MetaDecisionConfig,
    compose_rationale,
    critical_objects,
    meta_decision,
)
from .synth import BlockageConfig, ScenarioLog, blockage_label


class TaskKind(Enum):
    PLANNING = "planning"
    PLANNING_COT = "planning_cot"
    DETECTION_3D = "detection_3d"
    ROADGRAPH = "roadgraph"
    BLOCKAGE = "blockage"


@dataclass(frozen=True)
class TaskSample:
    kind: TaskKind
    prompt: str
    target: str
    scenario_id: str

    def __post_init__(self):
        # empty targets are legal only for detection on an empty scene
        if not self.prompt:
            raise InvalidScenario("prompt must be nonempty")
        if not self.target and self.kind is not TaskKind.DETECTION_3D:
            raise InvalidScenario(f"{self.kind.value} target must be nonempty")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "prompt": self.prompt,
            "target": self.target,
            "scenario_id": self.scenario_id,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "TaskSample":
        return cls(TaskKind(d["kind"]), d["prompt"], d["target"], d["scenario_id"])


PLANNING_PROMPT = (
    "You are the planner of the ego vehicle. Intent: {intent}. "
    "Ego history: {history}. Predict the future trajectory."
)
COT_INSTRUCTION = " Explain your driving rationale before the trajectory."
DETECTION_PROMPT = "detect every object in 3D"
ROADGRAPH_PROMPT = "Estimate the drivable lane polylines around the ego vehicle."
BLOCKAGE_QUESTION = "is the road ahead temporarily blocked?"


def build_planning_sample(
    s: ScenarioLog,
    with_rationale: bool = False,
    rationale_first: bool = True,
    decision_cfg: MetaDecisionConfig = MetaDecisionConfig(),
    critical_cfg: CriticalObjectConfig = CriticalObjectConfig(),
) -> TaskSample:
    """Planning pair; with_rationale prepends the R1..R4 rationale to the target."""
    if not s.ego_history.points or not s.ego_future.points:
        raise InvalidScenario("planning sample needs nonempty history and future")
    history_text = encode_trajectory(s.ego_history)
    future_text = encode_trajectory(s.ego_future)
    prompt = PLANNING_PROMPT.format(intent=s.intent.value, history=history_text)
    if not with_rationale:
        return TaskSample(TaskKind.PLANNING, prompt, future_text, s.id)

    criticals = critical_objects(s.ego_future, s.boxes, critical_cfg)
    decision = meta_decision(s.ego_future, decision_cfg)
    rationale_text = compose_rationale(s, criticals, decision)
    if rationale_first:
        target = rationale_text + "\n" + future_text
    else:
        target = future_text + "\n" + rationale_text
    return TaskSample(TaskKind.PLANNING_COT, prompt + COT_INSTRUCTION, target, s.id)


def split_cot_target(target: str, rationale_first: bool = True) -> tuple[str, str]:
    """Split a chain-of-thought target into (rationale text, trajectory text)."""
    if rationale_first:
        rationale_text, _, traj_text = target.rpartition("\n")
    else:
        traj_text, _, rationale_text = target.partition("\n")
    return rationale_text, traj_text


def build_detection_sample(s: ScenarioLog) -> TaskSample:
    """3D detection pair; an empty scene yields an empty target (decodes to [])."""
    return TaskSample(TaskKind.DETECTION_3D, DETECTION_PROMPT, encode_boxes(s.boxes), s.id)


def build_roadgraph_sample(
    s: ScenarioLog,
    cfg: RoadgraphCodecConfig = RoadgraphCodecConfig(),
    seed: int = 0,
    training_mode: bool = False,
) -> TaskSample:
    target = encode_roadgraph(s.roadgraph, s.ego_pose, cfg, seed, training_mode)
    return TaskSample(TaskKind.ROADGRAPH, ROADGRAPH_PROMPT, target, s.id)


def build_blockage_sample(s: ScenarioLog, cfg: BlockageConfig = BlockageConfig()) -> TaskSample:
    road_users = [b for b in s.boxes if b.x > 0.0]
    users_text = encode_boxes(road_users) or "none"
    prompt = f"{BLOCKAGE_QUESTION} road users: {users_text}"
    target = "yes" if blockage_label(s, cfg) else "no"
    return TaskSample(TaskKind.BLOCKAGE, prompt, target, s.id)
