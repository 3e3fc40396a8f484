"""Recall@K, MAP@R, seed-level aggregation, and the feedback/MAP correlation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateVariance, UndefinedForZeroR


@dataclass(frozen=True)
class TrialOutcome:
    """Everything the metrics need about one trial.

    refined_hits / control_hits are per-rank positivity of the returned lists;
    refined_hits is None exactly when the trial failed (empty candidate set).
    total_positives is R: how many positives exist in the test database.
    """

    refined_hits: tuple[bool, ...] | None
    control_hits: tuple[bool, ...]
    n_positive_feedback: int
    total_positives: int

    @property
    def failed(self) -> bool:
        return self.refined_hits is None

    def refined_recall(self, k: int) -> int:
        if self.failed:
            return 0
        return recall_at_k(self.refined_hits, k)

    def control_recall(self, k: int) -> int:
        return recall_at_k(self.control_hits, k)

    def refined_map_at_r(self) -> float:
        if self.failed:
            return 0.0
        return map_at_r(self.refined_hits, self.total_positives)

    def control_map_at_r(self) -> float:
        return map_at_r(self.control_hits, self.total_positives)


def recall_at_k(hits: Sequence[bool], k: int) -> int:
    """1 iff any of the first min(k, len) ranks is positive.

    Lists shorter than k count their missing tail as non-positive.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return 1 if any(hits[:k]) else 0


def map_at_r(hits: Sequence[bool], r: int) -> float:
    """(1/R) * sum_{i=1..R} P(i); P(i) = precision-at-i if rank i is positive, else 0.

    Ranks beyond the returned list contribute 0. Raises UndefinedForZeroR for R=0.
    """
    if r < 1:
        raise UndefinedForZeroR("MAP@R needs at least one positive in the test db")
    total = 0.0
    n_hit = 0
    for i, hit in enumerate(hits[:r], start=1):
        if hit:
            n_hit += 1
            total += n_hit / i
    return total / r


def aggregate(per_seed_values: Sequence[float]) -> tuple[float, float]:
    """Mean and population std over per-seed values."""
    if len(per_seed_values) == 0:
        raise ValueError("need at least one seed")
    arr = np.asarray(per_seed_values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def feedback_correlation(
    outcomes: Sequence[TrialOutcome],
) -> tuple[float, list[tuple[int, float]]]:
    """Pearson r between positive-feedback count and refined MAP@R.

    Trials with R=0 (MAP undefined) are skipped. Returns the scatter points
    alongside r for external plotting.
    """
    points = [
        (o.n_positive_feedback, o.refined_map_at_r())
        for o in outcomes
        if o.total_positives >= 1
    ]
    if len(points) < 2:
        raise DegenerateVariance("need at least two outcomes with defined MAP@R")
    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if xs.std() == 0.0 or ys.std() == 0.0:
        raise DegenerateVariance("all x or all y identical")
    r = float(np.corrcoef(xs, ys)[0, 1])
    return r, points


def correlation_points_csv(points: Sequence[tuple[int, float]]) -> str:
    lines = ["n_pos,map_at_r"]
    lines += [f"{n},{m:.6f}" for n, m in points]
    return "\n".join(lines) + "\n"
