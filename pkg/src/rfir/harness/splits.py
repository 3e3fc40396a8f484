"""Corpus filtering and seeded stratified 1:2:2 splits.

Strata are full captions (the exact label set). Each stratum is shuffled and
divided into query / feedback-db / test-db at ratio 1:2:2, rounded by largest
remainder with tie priority query -> feedback -> test.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyAfterFilter, StratumTooSmall
from ..store import LabeledCorpus

RATIOS = (1, 2, 2)


def filter_corpus(corpus: LabeledCorpus, min_caption_count: int = 5) -> LabeledCorpus:
    """Drop items whose adjective is the literal placeholder "adj", then drop
    items whose full caption occurs on fewer than min_caption_count items."""
    kept = [it for it in corpus.items if it.adj != "adj"]
    counts = Counter(it.caption for it in kept)
    kept = [it for it in kept if counts[it.caption] >= min_caption_count]
    if not kept:
        raise EmptyAfterFilter("no items left after caption filtering")
    return LabeledCorpus(items=tuple(kept))


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    query_ids: tuple[str, ...]
    feedback_db_ids: tuple[str, ...]
    test_db_ids: tuple[str, ...]
    # stratum caption -> (n_query, n_feedback, n_test)
    allocation: dict[tuple[str, ...], tuple[int, int, int]]


def allocate_122(n: int) -> tuple[int, int, int]:
    """Largest-remainder split of n items at ratio 1:2:2."""
    total = sum(RATIOS)
    quotas = [n * r / total for r in RATIOS]
    base = [int(q) for q in quotas]
    leftover = n - sum(base)
    # ties in remainder resolve in declaration order: query, feedback, test
    order = sorted(range(3), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return tuple(base)  # type: ignore[return-value]


def split_corpus(corpus: LabeledCorpus, seed: int) -> SplitSpec:
    """Deterministic stratified partition into query / feedback db / test db."""
    rng = np.random.default_rng(seed)
    strata: dict[tuple[str, ...], list[str]] = {}
    for it in corpus.items:
        strata.setdefault(it.caption, []).append(it.item_id)

    query: list[str] = []
    feedback: list[str] = []
    test: list[str] = []
    allocation: dict[tuple[str, ...], tuple[int, int, int]] = {}
    for caption in sorted(strata):
        ids = strata[caption]
        if len(ids) < sum(RATIOS):
            raise StratumTooSmall(
                f"caption {caption} has {len(ids)} items; need >= {sum(RATIOS)}"
            )
        n_q, n_f, n_t = allocate_122(len(ids))
        allocation[caption] = (n_q, n_f, n_t)
        perm = rng.permutation(len(ids))
        shuffled = [ids[i] for i in perm]
        query += shuffled[:n_q]
        feedback += shuffled[n_q : n_q + n_f]
        test += shuffled[n_q + n_f :]

    return SplitSpec(
        seed=seed,
        query_ids=tuple(query),
        feedback_db_ids=tuple(feedback),
        test_db_ids=tuple(test),
        allocation=allocation,
    )
