"""Generalist training-mixture planning and sampling.

Each task is drawn with probability proportional to its dataset size; the
total iteration count for e epochs is e times the pooled dataset size.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterator, Sequence

from .errors import EmptyMixture


@dataclass(frozen=True)
class MixturePlan:
    sizes: tuple[int, ...]
    epochs: float
    total_iterations: int
    probabilities: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "epochs": self.epochs,
            "total_iterations": self.total_iterations,
            "probabilities": list(self.probabilities),
        }


def plan(sizes: Sequence[int], epochs: float) -> MixturePlan:
    """Size-proportional probabilities and the epoch-scaled iteration budget."""
    if not sizes:
        raise EmptyMixture("mixture needs at least one dataset")
    if any(s < 1 for s in sizes):
        raise ValueError(f"dataset sizes must be >= 1, got {list(sizes)}")
    if epochs <= 0:
        raise ValueError(f"epochs must be positive, got {epochs}")
    total = sum(sizes)
    # half-up rounding for fractional epoch budgets
    iterations = int(epochs * total + 0.5)
    return MixturePlan(
        sizes=tuple(int(s) for s in sizes),
        epochs=float(epochs),
        total_iterations=iterations,
        probabilities=tuple(s / total for s in sizes),
    )


def sample_stream(p: MixturePlan, seed: int) -> Iterator[tuple[int, int]]:
    """Yield total_iterations (task_index, example_index) draws, reproducibly.

    Each draw consumes two values from a ``random.Random(seed)`` generator:
    one uniform for the task, one randrange for the example.
    """
    rng = random.Random(seed)
    cum = list(accumulate(p.probabilities))
    cum[-1] = 1.0
    n_tasks = len(p.sizes)
    for _ in range(p.total_iterations):
        task = min(bisect_right(cum, rng.random()), n_tasks - 1)
        example = rng.randrange(p.sizes[task])
        yield task, example


def empirical_ratios(draws: Sequence[tuple[int, int]], n_tasks: int | None = None) -> list[float]:
    """Per-task frequencies of a stream prefix; ratios sum to 1."""
    if not draws:
        raise ValueError("need at least one draw")
    if n_tasks is None:
        n_tasks = max(t for t, _ in draws) + 1
    counts = [0] * n_tasks
    for t, _ in draws:
        counts[t] += 1
    n = len(draws)
    return [c / n for c in counts]
