"""drivetext: deterministic task-as-text toolkit for driving scenarios.

Text codecs for trajectories, 3D boxes, and roadgraphs; open-loop planning
and perception metrics; trajectory candidate aggregation; a chain-of-thought
rationale labeler; a training-mixture sampler; and a synthetic scenario
generator that exercises all of it end to end.
"""

from .aggregation import CandidateSet, kmeans_representatives, median_trajectory, sampling_ablation
from .codec import (
    BOX_CLASSES,
    Box3D,
    IntentCommand,
    RoadGraph,
    RoadgraphCodecConfig,
    decode_boxes,
    decode_roadgraph,
    decode_trajectory,
    encode_boxes,
    encode_roadgraph,
    encode_trajectory,
    parse_intent,
)
from .errors import (
    DegeneratePolyline,
    DriveTextError,
    EmptyEvalSet,
    EmptyMixture,
    EncodeError,
    GridError,
    HorizonError,
    InvalidGeometry,
    InvalidScenario,
    KError,
    ParseError,
    ShapeMismatch,
    TruncationError,
    UnknownClass,
)
from .geometry import (
    Polyline,
    Pose2D,
    Trajectory,
    Waypoint,
    arc_length_resample,
    trajectory_l2,
    transform_to_ego,
    transform_to_global,
)
from .mixture import MixturePlan, empirical_ratios, plan, sample_stream
from .perception import LetConfig, PRReport, Rect, chamfer, detection_pr, lane_pr, raster_pr
from .planning import PlanningReport, ade, l2_at, planning_report
from .rationale import (
    CriticalObject,
    CriticalObjectConfig,
    LateralAction,
    MetaDecision,
    MetaDecisionConfig,
    Rationale,
    SpeedAction,
    compose_rationale,
    critical_objects,
    meta_decision,
)
from .synth import (
    BlockageConfig,
    GeneratorConfig,
    ScenarioLog,
    blockage_label,
    constant_velocity_planner,
    gen_scenario,
    gen_scenarios,
    noisy_oracle_planner,
)
from .tasks import (
    TaskKind,
    TaskSample,
    build_blockage_sample,
    build_detection_sample,
    build_planning_sample,
    build_roadgraph_sample,
    split_cot_target,
)

__version__ = "0.1.0"
