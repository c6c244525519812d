import json

import numpy as np
import pytest

from drivetext.codec import Box3D, IntentCommand
from drivetext.errors import InvalidScenario
from drivetext.geometry import Trajectory
from drivetext.rationale import LateralAction, meta_decision
from drivetext.synth import (
    INTENT_LATERAL,
    BlockageConfig,
    GeneratorConfig,
    ScenarioLog,
    blockage_label,
    constant_velocity_planner,
    gen_scenario,
    gen_scenarios,
    noisy_candidate_set,
    noisy_oracle_planner,
)


class TestGenerator:
    def test_fixed_seed_byte_identical_json(self):
        cfg = GeneratorConfig.preset("womd")
        a = json.dumps(gen_scenario(cfg, 11).to_json_dict(), sort_keys=True)
        b = json.dumps(gen_scenario(cfg, 11).to_json_dict(), sort_keys=True)
        assert a == b

    def test_different_seeds_differ(self):
        cfg = GeneratorConfig.preset("womd")
        assert gen_scenario(cfg, 1).to_json_dict() != gen_scenario(cfg, 2).to_json_dict()

    def test_zero_agents_no_boxes_no_blockage(self):
        cfg = GeneratorConfig.preset("womd", agent_count_range=(0, 0), blockage_rate=1.0)
        for seed in range(10):
            s = gen_scenario(cfg, seed)
            assert s.boxes == ()
            assert s.blockage is False

    def test_turn_left_intent_and_meta_consistency(self):
        cfg = GeneratorConfig.preset("womd", maneuvers=("turn_left",), agent_count_range=(0, 2))
        for seed in range(10):
            s = gen_scenario(cfg, seed)
            assert s.intent is IntentCommand.TURN_LEFT
            assert meta_decision(s.ego_future).lateral_action is LateralAction.LEFT

    def test_intent_always_consistent_with_realized_lateral(self):
        cfg = GeneratorConfig.preset("womd")
        for seed in range(40):
            s = gen_scenario(cfg, seed)
            realized = meta_decision(s.ego_future).lateral_action
            assert INTENT_LATERAL[s.intent] is realized

    def test_presets_shape(self):
        w = gen_scenario(GeneratorConfig.preset("womd"), 0)
        assert len(w.ego_history) == 2 and len(w.ego_future) == 16
        assert w.ego_future.dt == 0.5
        n = gen_scenario(GeneratorConfig.preset("nuscenes"), 0)
        assert len(n.ego_history) == 4 and len(n.ego_future) == 6

    def test_history_ends_at_origin(self):
        s = gen_scenario(GeneratorConfig.preset("womd"), 5)
        last = s.ego_history.points[-1]
        assert (last.x, last.y) == (0.0, 0.0)

    def test_json_round_trip(self):
        s = gen_scenario(GeneratorConfig.preset("nuscenes"), 9)
        back = ScenarioLog.from_json_dict(json.loads(json.dumps(s.to_json_dict())))
        assert back.to_json_dict() == s.to_json_dict()

    def test_batch_uses_distinct_seeds(self):
        logs = gen_scenarios(GeneratorConfig.preset("womd"), 5, 100)
        assert len({s.id for s in logs}) == 5


class TestConstantVelocityPlanner:
    def test_exact_on_constant_subset(self):
        cfg = GeneratorConfig.preset(
            "womd", maneuvers=("straight",), speed_profiles=("constant",), agent_count_range=(0, 0)
        )
        for seed in range(10):
            s = gen_scenario(cfg, seed)
            pred = constant_velocity_planner(s.ego_history, len(s.ego_future))
            for a, b in zip(pred.points, s.ego_future.points):
                assert a.x == b.x and a.y == b.y

    def test_stationary_history(self):
        hist = Trajectory.from_xy(0.5, [(3.0, 1.0), (3.0, 1.0)])
        pred = constant_velocity_planner(hist, 4)
        assert pred.coords() == [(3.0, 1.0)] * 4

    def test_hand_extrapolation(self):
        # last-step velocity (2, 0) at dt 0.5 -> offsets 1, 2, 3, 4
        hist = Trajectory.from_xy(0.5, [(-1.0, 0.0), (0.0, 0.0)])
        pred = constant_velocity_planner(hist, 4)
        assert pred.coords() == [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]

    def test_single_point_history_raises(self):
        with pytest.raises(InvalidScenario):
            constant_velocity_planner(Trajectory.from_xy(0.5, [(0, 0)]), 4)


class TestNoisyOracle:
    def _gt(self, n=16):
        return Trajectory.from_xy(0.5, [((i + 1) * 2.0, 0.0) for i in range(n)])

    def test_zero_sigma_exact(self):
        gt = self._gt()
        assert noisy_oracle_planner(gt, 0.0, 3).coords() == gt.coords()

    def test_same_seed_identical(self):
        gt = self._gt()
        a = noisy_oracle_planner(gt, 0.5, 42)
        b = noisy_oracle_planner(gt, 0.5, 42)
        assert a.coords() == b.coords()

    def test_sample_std(self):
        gt = Trajectory.from_xy(0.5, [(0.0, 0.0)] * 5000)
        xs = []
        for seed in range(2):
            t = noisy_oracle_planner(gt, 0.5, seed)
            xs.extend(x for x, _ in t.coords())
        std = float(np.std(xs))
        assert 0.48 <= std <= 0.52

    def test_candidate_set_shapes(self):
        cs = noisy_candidate_set(self._gt(), 8, 0.3, 17)
        assert len(cs) == 8
        assert cs.source_seed == 17


class TestBlockage:
    def _log(self, boxes, speeds):
        base = gen_scenario(
            GeneratorConfig.preset("womd", agent_count_range=(0, 0), blockage_rate=0.0), 0
        )
        from dataclasses import replace

        return replace(base, boxes=tuple(boxes), box_speeds=tuple(speeds))

    def _cone(self, x, y):
        return Box3D(x, y, 0.35, 0.4, 0.5, 0.7, 0.0, "other")

    def test_empty_road_false(self):
        s = self._log([], [])
        assert blockage_label(s) is False

    def test_cone_wall_at_twenty_meters(self):
        cones = [self._cone(20.0, y) for y in (-1.4, -0.7, 0.0, 0.7, 1.4)]
        s = self._log(cones, [0.0] * 5)
        assert blockage_label(s) is True

    def test_single_cone_thirty_percent(self):
        # one box covering ~30% of a 3.5 m lane: 1.05 m wide
        box = Box3D(20.0, 0.0, 0.35, 0.4, 1.05, 0.7, 0.0, "other")
        s = self._log([box], [0.0])
        assert blockage_label(s) is False

    def test_moving_wall_not_blockage(self):
        cones = [self._cone(20.0, y) for y in (-1.4, -0.7, 0.0, 0.7, 1.4)]
        s = self._log(cones, [5.0] * 5)
        assert blockage_label(s) is False

    def test_beyond_lookahead_ignored(self):
        cones = [self._cone(60.0, y) for y in (-1.4, -0.7, 0.0, 0.7, 1.4)]
        s = self._log(cones, [0.0] * 5)
        assert blockage_label(s, BlockageConfig(lookahead=40.0)) is False
        assert blockage_label(s, BlockageConfig(lookahead=80.0)) is True

    def test_generated_flag_matches_labeler(self):
        cfg = GeneratorConfig.preset("womd", blockage_rate=0.7)
        for seed in range(30):
            s = gen_scenario(cfg, seed)
            assert s.blockage == blockage_label(s, BlockageConfig())
