import random

import pytest

from drivetext.errors import EmptyEvalSet, GridError, HorizonError, ShapeMismatch
from drivetext.geometry import Trajectory
from drivetext.planning import NUSCENES_HORIZONS, WOMD_HORIZONS, ade, l2_at, planning_report


def traj(dt, xy):
    return Trajectory.from_xy(dt, xy)


class TestAde:
    def test_identical_is_zero(self):
        t = traj(0.5, [(i + 1, 0) for i in range(16)])
        for h in WOMD_HORIZONS:
            assert ade(t, t, h) == 0.0

    def test_constant_offset(self):
        gt = traj(0.5, [(i + 1, 0) for i in range(16)])
        pred = traj(0.5, [(i + 1, 0.75) for i in range(16)])
        for h in WOMD_HORIZONS:
            assert ade(pred, gt, h) == pytest.approx(0.75)

    def test_hand_mean(self):
        # offsets 0, 1, 2 m at the three timestamps -> mean 1.0
        gt = traj(1.0, [(1, 0), (2, 0), (3, 0)])
        pred = traj(1.0, [(1, 0), (2, 1), (3, 2)])
        assert ade(pred, gt, 3.0) == pytest.approx(1.0)

    def test_horizon_beyond_raises(self):
        t = traj(0.5, [(1, 0), (2, 0)])
        with pytest.raises(HorizonError):
            ade(t, t, 5.0)

    def test_dt_mismatch(self):
        a = traj(0.5, [(1, 0), (2, 0)])
        b = traj(0.25, [(1, 0), (2, 0)])
        with pytest.raises(ShapeMismatch):
            ade(a, b, 0.5)

    def test_monotone_for_growing_error(self):
        rng = random.Random(1)
        for _ in range(20):
            n = 16
            errs = [0.0]
            for _ in range(n - 1):
                errs.append(errs[-1] + rng.uniform(0, 0.5))
            gt = traj(0.5, [(i + 1.0, 0.0) for i in range(n)])
            pred = traj(0.5, [(i + 1.0, errs[i]) for i in range(n)])
            values = [ade(pred, gt, h) for h in (1, 2, 4, 8)]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestL2At:
    def test_identical(self):
        t = traj(0.5, [(i + 1, 0) for i in range(6)])
        for h in NUSCENES_HORIZONS:
            assert l2_at(t, t, h) == 0.0

    def test_linear_divergence(self):
        # error grows 0.1 m per step; at t=3 s with dt=0.5 that is step 6 -> 0.6
        gt = traj(0.5, [(i + 1.0, 0.0) for i in range(6)])
        pred = traj(0.5, [(i + 1.0, 0.1 * (i + 1)) for i in range(6)])
        assert l2_at(pred, gt, 3.0) == pytest.approx(0.6)

    def test_pure_lateral_offset(self):
        gt = traj(0.5, [(i + 1.0, 0.0) for i in range(6)])
        pred = traj(0.5, [(i + 1.0, 0.5) for i in range(6)])
        assert l2_at(pred, gt, 2.0) == pytest.approx(0.5)

    def test_off_grid_raises(self):
        t = traj(0.5, [(i + 1.0, 0.0) for i in range(6)])
        with pytest.raises(GridError):
            l2_at(t, t, 1.3)
        with pytest.raises(GridError):
            l2_at(t, t, 99.0)

    def test_equals_ade_on_single_point(self):
        gt = traj(1.0, [(5.0, 0.0)])
        pred = traj(1.0, [(5.0, 2.0)])
        assert l2_at(pred, gt, 1.0) == ade(pred, gt, 1.0) == pytest.approx(2.0)


class TestReport:
    def _pair(self, offset, n=16, dt=0.5):
        gt = traj(dt, [(i + 1.0, 0.0) for i in range(n)])
        pred = traj(dt, [(i + 1.0, offset) for i in range(n)])
        return pred, gt

    def test_identical_pairs_all_zero(self):
        pairs = [self._pair(0.0) for _ in range(3)]
        rep = planning_report(pairs)
        assert all(v == 0.0 for v in rep.ade_at.values())
        assert all(v == 0.0 for v in rep.l2_at.values())
        assert rep.avg_l2 == 0.0
        assert rep.n_examples == 3

    def test_single_pair_matches_pointwise_metrics(self):
        pred, gt = self._pair(1.25)
        rep = planning_report([(pred, gt)], ade_horizons=(1.0, 8.0), l2_horizons=(1.0, 3.0))
        assert rep.ade_at[8.0] == pytest.approx(ade(pred, gt, 8.0))
        assert rep.l2_at[3.0] == pytest.approx(l2_at(pred, gt, 3.0))

    def test_mean_over_examples(self):
        p1 = self._pair(1.0)
        p2 = self._pair(3.0)
        rep = planning_report([p1, p2], ade_horizons=(1.0,), l2_horizons=(1.0,))
        assert rep.ade_at[1.0] == pytest.approx(2.0)

    def test_avg_l2_is_mean_of_horizon_means(self):
        pred, gt = self._pair(2.0, n=6)
        rep = planning_report([(pred, gt)], ade_horizons=(), l2_horizons=NUSCENES_HORIZONS)
        assert rep.avg_l2 == pytest.approx(
            sum(rep.l2_at.values()) / len(rep.l2_at)
        )

    def test_empty_raises(self):
        with pytest.raises(EmptyEvalSet):
            planning_report([])

    def test_json_and_table_render(self):
        rep = planning_report([self._pair(0.5)])
        d = rep.to_json_dict()
        assert d["n_examples"] == 1
        assert "1" in d["ade_at"]
        table = rep.to_table()
        assert "horizon" in table and "avg L2" in table
