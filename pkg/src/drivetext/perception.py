"""Perception metrics: lane Chamfer matching, BEV raster PR, detection PR.

Lane matching follows a true-positive-at-threshold convention (Chamfer within
1 meter by default); detection matching forgives longitudinal error along the
line of sight up to a range-proportional tolerance. Matching is one-to-one at
maximum cardinality: a deterministic ascending-cost greedy pass seeds the
matching and augmenting paths complete it, so the TP count always equals the
optimal assignment (plain greedy provably undercounts on some instances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec import Box3D, RoadGraph
from .errors import DegeneratePolyline
from .geometry import Polyline, arc_length_resample, polyline_length

CHAMFER_RESAMPLE_INTERVAL = 0.5


@dataclass(frozen=True)
class PRReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRReport":
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision = 1.0 if tp + fn == 0 else 0.0
        if tp + fn > 0:
            recall = tp / (tp + fn)
        else:
            recall = 1.0 if tp + fp == 0 else 0.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(precision, recall, f1, tp, fp, fn)

    def to_json_dict(self) -> dict:
        return {
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
            "tp": self.tp, "fp": self.fp, "fn": self.fn,
        }


@dataclass(frozen=True)
class LetConfig:
    """Simplified longitudinal-error-tolerant matching thresholds."""

    longitudinal_tolerance_pct: float = 0.10
    min_longitudinal_tolerance: float = 0.5
    lateral_tolerance: float = 1.0

    def __post_init__(self):
        if (self.longitudinal_tolerance_pct <= 0 or self.min_longitudinal_tolerance <= 0
                or self.lateral_tolerance <= 0):
            raise ValueError("all LET tolerances must be positive")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned BEV region of interest."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError(f"empty roi {self}")


DEFAULT_ROI = Rect(-50.0, -50.0, 150.0, 50.0)


def _dense_points(p: Polyline) -> np.ndarray:
    if polyline_length(p) <= 1e-12:
        raise DegeneratePolyline("cannot resample a zero-length polyline")
    dense = arc_length_resample(p, CHAMFER_RESAMPLE_INTERVAL, 0.0)
    return np.array(dense.coords(), dtype=float)


def chamfer(a: Polyline, b: Polyline) -> float:
    """Symmetric mean nearest-point distance after 0.5 m resampling."""
    pa = _dense_points(a)
    pb = _dense_points(b)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=-1))
    return 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())


def _match_count(pairs: list[tuple[float, int, int]], n_pred: int, n_gt: int) -> int:
    """Maximum-cardinality one-to-one match count over candidate pairs.

    Seeds with an ascending-score greedy pass, then augments unmatched
    predictions (Kuhn's algorithm), which is deterministic and optimal.
    """
    pairs.sort()
    adjacency: list[list[int]] = [[] for _ in range(n_pred)]
    for _, i, j in pairs:
        adjacency[i].append(j)
    match_p = [-1] * n_pred
    match_g = [-1] * n_gt
    for _, i, j in pairs:
        if match_p[i] == -1 and match_g[j] == -1:
            match_p[i] = j
            match_g[j] = i

    def augment(i: int, seen: list[bool]) -> bool:
        for j in adjacency[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_g[j] == -1 or augment(match_g[j], seen):
                match_p[i] = j
                match_g[j] = i
                return True
        return False

    for i in range(n_pred):
        if match_p[i] == -1:
            augment(i, [False] * n_gt)
    return sum(1 for j in match_p if j != -1)


def lane_pr(preds: RoadGraph, gts: RoadGraph, threshold: float = 1.0) -> PRReport:
    """Lane-level PR: a pair matches iff its Chamfer distance is within threshold."""
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    pred_pts = [_dense_points(pl) for pl in preds.polylines]
    gt_pts = [_dense_points(pl) for pl in gts.polylines]
    pairs = []
    for i, pa in enumerate(pred_pts):
        for j, pb in enumerate(gt_pts):
            d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=-1))
            c = 0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean())
            if c <= threshold:
                pairs.append((c, i, j))
    tp = _match_count(pairs, len(pred_pts), len(gt_pts))
    return PRReport.from_counts(tp, len(pred_pts) - tp, len(gt_pts) - tp)


def _supercover_segment(x0: float, y0: float, x1: float, y1: float) -> set[tuple[int, int]]:
    """Grid cells crossed by a segment given in grid units; corners mark all 4."""
    cells = {(math.floor(x0), math.floor(y0)), (math.floor(x1), math.floor(y1))}
    dx = x1 - x0
    dy = y1 - y0
    xs: set[float] = set()
    ys: set[float] = set()
    if dx != 0.0:
        lo, hi = sorted((x0, x1))
        k = math.ceil(lo)
        while k <= hi:
            if lo < k < hi:
                xs.add((k - x0) / dx)
            k += 1
    if dy != 0.0:
        lo, hi = sorted((y0, y1))
        k = math.ceil(lo)
        while k <= hi:
            if lo < k < hi:
                ys.add((k - y0) / dy)
            k += 1
    ts = sorted({0.0, 1.0} | xs | ys)
    for ta, tb in zip(ts, ts[1:]):
        tm = 0.5 * (ta + tb)
        cells.add((math.floor(x0 + tm * dx), math.floor(y0 + tm * dy)))
    eps = 1e-12
    for t in xs:
        if any(abs(t - u) <= eps for u in ys):
            cx = round(x0 + t * dx)
            cy = round(y0 + t * dy)
            cells.update({(cx - 1, cy - 1), (cx, cy - 1), (cx - 1, cy), (cx, cy)})
    return cells


def rasterize(rg: RoadGraph, roi: Rect, resolution: float = 1.0) -> set[tuple[int, int]]:
    """Occupied-cell set of a roadgraph on the ROI grid (floor convention)."""
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    nx = math.ceil((roi.x_max - roi.x_min) / resolution)
    ny = math.ceil((roi.y_max - roi.y_min) / resolution)
    occupied: set[tuple[int, int]] = set()
    for pl in rg.polylines:
        for a, b in zip(pl.points, pl.points[1:]):
            cells = _supercover_segment(
                (a.x - roi.x_min) / resolution,
                (a.y - roi.y_min) / resolution,
                (b.x - roi.x_min) / resolution,
                (b.y - roi.y_min) / resolution,
            )
            occupied.update(c for c in cells if 0 <= c[0] < nx and 0 <= c[1] < ny)
    return occupied


def raster_pr(preds: RoadGraph, gts: RoadGraph, roi: Rect = DEFAULT_ROI,
              resolution: float = 1.0) -> PRReport:
    """Pixel-level PR over BEV occupancy grids of both roadgraphs."""
    p = rasterize(preds, roi, resolution)
    g = rasterize(gts, roi, resolution)
    tp = len(p & g)
    return PRReport.from_counts(tp, len(p) - tp, len(g) - tp)


def _let_candidate(pred: Box3D, gt: Box3D, cfg: LetConfig) -> bool:
    ex = pred.x - gt.x
    ey = pred.y - gt.y
    r = gt.range
    if r > 1e-9:
        ux, uy = gt.x / r, gt.y / r
        lon = ex * ux + ey * uy
        lat = math.hypot(ex - lon * ux, ey - lon * uy)
    else:
        # gt at the origin: no line of sight, the full error is longitudinal
        lon = math.hypot(ex, ey)
        lat = 0.0
    tol = max(cfg.longitudinal_tolerance_pct * r, cfg.min_longitudinal_tolerance)
    return abs(lon) <= tol and lat <= cfg.lateral_tolerance


def detection_pr(preds: Sequence[Box3D], gts: Sequence[Box3D],
                 cfg: LetConfig = LetConfig()) -> PRReport:
    """Detection PR with class-gated, longitudinal-error-tolerant matching."""
    pairs = []
    for i, p in enumerate(preds):
        for j, g in enumerate(gts):
            if p.cls != g.cls:
                continue
            if _let_candidate(p, g, cfg):
                pairs.append((math.hypot(p.x - g.x, p.y - g.y), i, j))
    tp = _match_count(pairs, len(preds), len(gts))
    return PRReport.from_counts(tp, len(preds) - tp, len(gts) - tp)
