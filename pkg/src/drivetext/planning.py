"""Open-loop planning metrics: ADE over horizons and L2-at-horizon.

Future trajectories place point i at time (i+1)*dt; ADE averages strictly
positive timestamps up to the horizon, L2 reads the displacement at exactly
the horizon timestamp. Both conventions appear in the report, labeled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyEvalSet, GridError, HorizonError, ShapeMismatch
from .geometry import Trajectory

WOMD_HORIZONS = (1.0, 3.0, 5.0, 8.0)
NUSCENES_HORIZONS = (1.0, 2.0, 3.0)

_EPS = 1e-9


def _check_dt(pred: Trajectory, gt: Trajectory) -> None:
    if pred.dt != gt.dt:
        raise ShapeMismatch(f"dt mismatch: {pred.dt} vs {gt.dt}")


def ade(pred: Trajectory, gt: Trajectory, horizon: float) -> float:
    """Mean displacement over all timestamps t <= horizon (t > 0)."""
    _check_dt(pred, gt)
    n_steps = int(math.floor(horizon / pred.dt + _EPS))
    if n_steps < 1:
        raise HorizonError(f"horizon {horizon} s is shorter than one step of {pred.dt} s")
    if n_steps > len(pred) or n_steps > len(gt):
        raise HorizonError(
            f"horizon {horizon} s needs {n_steps} steps; trajectories have {len(pred)} and {len(gt)}"
        )
    acc = 0.0
    for i in range(n_steps):
        pa, pb = pred.points[i], gt.points[i]
        acc += math.hypot(pa.x - pb.x, pa.y - pb.y)
    return acc / n_steps


def l2_at(pred: Trajectory, gt: Trajectory, t: float) -> float:
    """Displacement at exactly time t, which must lie on the shared grid."""
    _check_dt(pred, gt)
    idx_f = t / pred.dt - 1.0
    idx = round(idx_f)
    if abs(idx_f - idx) > 1e-6:
        raise GridError(f"t={t} s is not on the dt={pred.dt} s grid")
    if idx < 0 or idx >= len(pred) or idx >= len(gt):
        raise GridError(f"t={t} s is outside both trajectories")
    pa, pb = pred.points[idx], gt.points[idx]
    return math.hypot(pa.x - pb.x, pa.y - pb.y)


@dataclass(frozen=True)
class PlanningReport:
    ade_at: dict
    l2_at: dict
    avg_l2: float
    n_examples: int

    def to_json_dict(self) -> dict:
        return {
            "ade_at": {f"{h:g}": v for h, v in sorted(self.ade_at.items())},
            "l2_at": {f"{h:g}": v for h, v in sorted(self.l2_at.items())},
            "avg_l2": self.avg_l2,
            "n_examples": self.n_examples,
        }

    def to_table(self) -> str:
        lines = [f"planning metrics over {self.n_examples} examples"]
        lines.append(f"{'horizon (s)':>12} {'ADE (m, mean to t)':>20} {'L2 (m, at t)':>14}")
        for h in sorted(set(self.ade_at) | set(self.l2_at)):
            a = f"{self.ade_at[h]:.4f}" if h in self.ade_at else "-"
            l = f"{self.l2_at[h]:.4f}" if h in self.l2_at else "-"
            lines.append(f"{h:>12g} {a:>20} {l:>14}")
        lines.append(f"{'avg L2':>12} {'':>20} {self.avg_l2:>14.4f}")
        return "\n".join(lines)


def planning_report(
    pairs: Sequence[tuple[Trajectory, Trajectory]],
    ade_horizons: Sequence[float] = WOMD_HORIZONS,
    l2_horizons: Sequence[float] = NUSCENES_HORIZONS,
) -> PlanningReport:
    """Aggregate per-horizon means over (prediction, ground truth) pairs."""
    if not pairs:
        raise EmptyEvalSet("no (pred, gt) pairs to evaluate")
    ade_means = {
        h: sum(ade(p, g, h) for p, g in pairs) / len(pairs) for h in ade_horizons
    }
    l2_means = {
        h: sum(l2_at(p, g, h) for p, g in pairs) / len(pairs) for h in l2_horizons
    }
    avg_l2 = sum(l2_means.values()) / len(l2_means) if l2_means else 0.0
    return PlanningReport(ade_means, l2_means, avg_l2, len(pairs))
