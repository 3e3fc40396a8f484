"""The three simulated preference tasks and label-driven feedback generation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..engine import FeedbackSet, RankedList
from ..store import CorpusItem, FeatureStore, LabeledCorpus


class TaskKind(str, enum.Enum):
    CATEGORY = "category"
    ONE_LABEL = "one-label"
    CONDITIONED = "conditioned"


@dataclass(frozen=True)
class TaskTrial:
    """One simulated user intent for one query.

    target depends on kind:
      category    -> the query's full label set (frozenset)
      one-label   -> the focused label (str)
      conditioned -> (substituted adjective, query noun) pair
    """

    query_id: str
    kind: TaskKind
    target: object

    def is_positive(self, item: CorpusItem) -> bool:
        if self.kind is TaskKind.CATEGORY:
            return item.labels == self.target
        if self.kind is TaskKind.ONE_LABEL:
            return self.target in item.labels
        adj, noun = self.target
        return item.adj == adj and item.noun == noun


def enumerate_trials(
    query: CorpusItem,
    kind: TaskKind,
    corpus: LabeledCorpus,
    test_db_ids: tuple[str, ...],
) -> list[TaskTrial]:
    """All trials for one query.

    category: one trial. one-label: one per query label. conditioned: one per
    adjective different from the query's, keeping only trials with at least
    one positive in the test database. Queries without (adj, noun) yield no
    conditioned trials.
    """
    if kind is TaskKind.CATEGORY:
        return [TaskTrial(query.item_id, kind, query.labels)]
    if kind is TaskKind.ONE_LABEL:
        return [TaskTrial(query.item_id, kind, l) for l in sorted(query.labels)]
    if query.adj is None or query.noun is None:
        return []
    all_adjs = sorted(
        {it.adj for it in corpus.items if it.adj is not None} - {query.adj}
    )
    trials = []
    for adj in all_adjs:
        trial = TaskTrial(query.item_id, kind, (adj, query.noun))
        if any(trial.is_positive(corpus[i]) for i in test_db_ids):
            trials.append(trial)
    return trials


def simulate_feedback(
    ranked: RankedList,
    trial: TaskTrial,
    corpus: LabeledCorpus,
    feedback_store: FeatureStore,
    flip_prob: float = 0.0,
    rng: np.random.Generator | None = None,
) -> FeedbackSet:
    """Binary feedback from labels: bit = trial predicate on the item,
    each bit independently flipped with probability flip_prob."""
    bits = np.array(
        [1 if trial.is_positive(corpus[e.item_id]) else 0 for e in ranked],
        dtype=np.uint8,
    )
    if flip_prob > 0.0:
        if rng is None:
            rng = np.random.default_rng()
        flips = rng.random(len(bits)) < flip_prob
        bits = np.where(flips, 1 - bits, bits).astype(np.uint8)
    return FeedbackSet.from_ranked(ranked, feedback_store, bits)
