"""Choosing a final trajectory from sampled candidates.

Implements median-by-average-pairwise-L2 selection, k-means representatives
with occupancy probabilities, and the ADE-vs-sample-count ablation curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KError, ShapeMismatch
from .geometry import Trajectory
from .planning import ade


@dataclass(frozen=True)
class CandidateSet:
    """Sampled trajectories of identical shape for one scenario."""

    candidates: tuple[Trajectory, ...]
    source_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ShapeMismatch("candidate set must be nonempty")
        first = self.candidates[0]
        for c in self.candidates[1:]:
            if c.dt != first.dt or len(c) != len(first):
                raise ShapeMismatch("candidates must share dt and length")

    def __len__(self) -> int:
        return len(self.candidates)


def _as_matrix(trajs: Sequence[Trajectory]) -> np.ndarray:
    return np.array([t.coords() for t in trajs], dtype=float)


def _pairwise_l2(arr: np.ndarray) -> np.ndarray:
    """Mean-over-time Euclidean distance between every pair of trajectories."""
    diffs = arr[:, None, :, :] - arr[None, :, :, :]
    return np.sqrt((diffs ** 2).sum(axis=-1)).mean(axis=-1)


def median_trajectory(cs: CandidateSet) -> tuple[int, Trajectory]:
    """Candidate with the lowest average L2 distance to all others."""
    n = len(cs)
    if n == 1:
        return 0, cs.candidates[0]
    dist = _pairwise_l2(_as_matrix(cs.candidates))
    means = dist.sum(axis=1) / (n - 1)
    idx = int(np.argmin(means))
    return idx, cs.candidates[idx]


def kmeans_representatives(
    cs: CandidateSet,
    k: int,
    max_iters: int = 50,
    seed: int = 0,
) -> list[tuple[Trajectory, float]]:
    """Cluster flattened trajectories; return (nearest member, size/n) per cluster.

    Uses k-means++ style seeding and Lloyd iterations. A cluster that empties
    is re-seeded to a random candidate once; after that duplicates may appear.
    Output is sorted by descending probability.
    """
    n = len(cs)
    if not (1 <= k <= n):
        raise KError(f"k={k} must satisfy 1 <= k <= {n}")
    X = _as_matrix(cs.candidates).reshape(n, -1)
    rng = np.random.default_rng(seed)

    centroids = [X[int(rng.integers(n))]]
    for _ in range(k - 1):
        d2 = np.min(
            ((X[:, None, :] - np.array(centroids)[None, :, :]) ** 2).sum(axis=-1), axis=1
        )
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids.append(X[idx])
    C = np.array(centroids)

    reseeded = [False] * k
    assign = np.full(n, -1)
    for _ in range(max_iters):
        d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)
        new_assign = d2.argmin(axis=1)
        for c in range(k):
            if not (new_assign == c).any() and not reseeded[c]:
                reseeded[c] = True
                C[c] = X[int(rng.integers(n))]
                d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=-1)
                new_assign = d2.argmin(axis=1)
        if (new_assign == assign).all():
            break
        assign = new_assign
        for c in range(k):
            members = X[assign == c]
            if len(members):
                C[c] = members.mean(axis=0)

    out = []
    for c in range(k):
        member_idx = np.flatnonzero(assign == c)
        pool = member_idx if len(member_idx) else np.arange(n)
        d = ((X[pool] - C[c]) ** 2).sum(axis=-1)
        rep = int(pool[int(np.argmin(d))])
        out.append((cs.candidates[rep], len(member_idx) / n))
    out.sort(key=lambda e: -e[1])
    return out


def sampling_ablation_detail(
    per_scenario_candidates: Sequence[CandidateSet],
    gts: Sequence[Trajectory],
    ks: Sequence[int],
) -> dict[int, list[float]]:
    """Per-scenario ADE of the median of the first k candidates, for each k."""
    if len(per_scenario_candidates) != len(gts):
        raise ShapeMismatch(
            f"{len(per_scenario_candidates)} candidate sets vs {len(gts)} ground truths"
        )
    if not ks:
        raise KError("need at least one k")
    kmax = max(ks)
    for cs in per_scenario_candidates:
        if len(cs) < kmax:
            raise KError(f"candidate set of size {len(cs)} cannot serve k={kmax}")

    out: dict[int, list[float]] = {k: [] for k in ks}
    for cs, gt in zip(per_scenario_candidates, gts):
        full = _pairwise_l2(_as_matrix(cs.candidates[:kmax]))
        horizon = len(gt) * gt.dt
        for k in ks:
            if k == 1:
                idx = 0
            else:
                sub = full[:k, :k]
                idx = int(np.argmin(sub.sum(axis=1) / (k - 1)))
            out[k].append(ade(cs.candidates[idx], gt, horizon))
    return out


def sampling_ablation(
    per_scenario_candidates: Sequence[CandidateSet],
    gts: Sequence[Trajectory],
    ks: Sequence[int],
) -> dict[int, float]:
    """Mean ADE at the full horizon as a function of the sample count k."""
    detail = sampling_ablation_detail(per_scenario_candidates, gts, ks)
    return {k: sum(v) / len(v) for k, v in detail.items()}
