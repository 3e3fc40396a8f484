"""Test-and-control experiment runner.

For every seed: stratified split, then per query and trial: first retrieval
over the feedback db, label-simulated feedback, refined retrieval over the
test db, plain-KNN control over the same test db, metrics. Results are
averaged per seed first, then mean +/- population std across seeds. Failed
trials (empty refined candidate set) score Recall@K = 0 and MAP@R = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..engine import (
    FailureSignal,
    OpCounter,
    RankedList,
    build_classifier,
    control_retrieve,
    knn_retrieve,
    refined_retrieve,
)
from ..metrics import TrialOutcome, aggregate, feedback_correlation
from ..store import FeatureStore, LabeledCorpus, check_pairing
from .splits import filter_corpus, split_corpus
from .tasks import TaskKind, TaskTrial, enumerate_trials, simulate_feedback


@dataclass(frozen=True)
class TaskRunConfig:
    task: TaskKind
    m: int = 50
    k_list: tuple[int, ...] = (1, 2, 4, 8)
    khat: int | None = None  # None means |V2|
    seeds: tuple[int, ...] = tuple(range(10))
    flip_prob: float = 0.0
    count_ops: bool = True
    min_caption_count: int = 5


@dataclass
class EvalReport:
    task: str
    m: int
    khat: str | int
    k_list: tuple[int, ...]
    seeds: tuple[int, ...]
    refined_recall: dict[int, tuple[float, float]]
    control_recall: dict[int, tuple[float, float]]
    refined_map_at_r: tuple[float, float]
    control_map_at_r: tuple[float, float]
    failures: int
    trials: int
    op_counts: dict[str, int]
    # raw per-trial outcomes across all seeds, for correlation analysis
    outcomes: list[TrialOutcome] = field(default_factory=list, repr=False)

    def correlation(self) -> tuple[float, list[tuple[int, float]]]:
        return feedback_correlation(self.outcomes)

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "m": self.m,
            "khat": self.khat,
            "k_list": list(self.k_list),
            "seeds": list(self.seeds),
            "refined": {
                "recall": {
                    str(k): {"mean": mu, "std": sd}
                    for k, (mu, sd) in self.refined_recall.items()
                },
                "map_at_r": {
                    "mean": self.refined_map_at_r[0],
                    "std": self.refined_map_at_r[1],
                },
            },
            "control": {
                "recall": {
                    str(k): {"mean": mu, "std": sd}
                    for k, (mu, sd) in self.control_recall.items()
                },
                "map_at_r": {
                    "mean": self.control_map_at_r[0],
                    "std": self.control_map_at_r[1],
                },
            },
            "failures": self.failures,
            "trials": self.trials,
            "op_counts": self.op_counts,
            "std_kind": "population",
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), indent=2, **kwargs)


def run_trial(
    u: np.ndarray,
    trial: TaskTrial,
    corpus: LabeledCorpus,
    feedback_store: FeatureStore,
    test_store: FeatureStore,
    m: int,
    k_max: int,
    khat: int | None,
    flip_prob: float = 0.0,
    rng: np.random.Generator | None = None,
    first_ranked: RankedList | None = None,
    refined_counter: OpCounter | None = None,
    control_counter: OpCounter | None = None,
) -> TrialOutcome:
    """One simulated trial: feedback round, refined arm, control arm."""
    if first_ranked is None:
        first_ranked = knn_retrieve(u, min(m, len(feedback_store)), feedback_store)
    fb = simulate_feedback(
        first_ranked, trial, corpus, feedback_store, flip_prob=flip_prob, rng=rng
    )
    clf = build_classifier(fb)

    k_eff = min(k_max, len(test_store))
    khat_val = len(test_store) if khat is None else min(khat, len(test_store))
    khat_val = max(khat_val, k_eff)
    refined = refined_retrieve(
        u, k_eff, khat_val, test_store, clf, counter=refined_counter
    )
    control = control_retrieve(u, k_max, test_store, counter=control_counter)

    if isinstance(refined, FailureSignal):
        refined_hits = None
    else:
        refined_hits = tuple(trial.is_positive(corpus[i]) for i in refined.ids())
    control_hits = tuple(trial.is_positive(corpus[i]) for i in control.ids())
    total_positives = sum(
        1 for i in test_store.ids if trial.is_positive(corpus[i])
    )
    return TrialOutcome(
        refined_hits=refined_hits,
        control_hits=control_hits,
        n_positive_feedback=fb.n_positive,
        total_positives=total_positives,
    )


def run_task(
    store: FeatureStore, corpus: LabeledCorpus, config: TaskRunConfig
) -> EvalReport:
    """Full simulated experiment over all seeds; deterministic given inputs."""
    check_pairing(store, corpus)
    filtered = filter_corpus(corpus, config.min_caption_count)
    k_list = tuple(sorted(config.k_list))
    k_max = k_list[-1]

    per_seed_refined: dict[int, list[float]] = {k: [] for k in k_list}
    per_seed_control: dict[int, list[float]] = {k: [] for k in k_list}
    per_seed_refined_map: list[float] = []
    per_seed_control_map: list[float] = []
    failures = 0
    n_trials = 0
    refined_ops = OpCounter()
    control_ops = OpCounter()
    all_outcomes: list[TrialOutcome] = []

    for seed in config.seeds:
        split = split_corpus(filtered, seed)
        feedback_store = store.select(split.feedback_db_ids)
        test_store = store.select(split.test_db_ids)
        rng = np.random.default_rng(seed) if config.flip_prob > 0 else None

        seed_outcomes: list[TrialOutcome] = []
        for query_id in split.query_ids:
            query = filtered[query_id]
            trials = enumerate_trials(
                query, config.task, filtered, split.test_db_ids
            )
            if not trials:
                continue
            u = store.vector(query_id)
            # the first-round ranking does not depend on the trial target
            first_ranked = knn_retrieve(
                u, min(config.m, len(feedback_store)), feedback_store
            )
            for trial in trials:
                outcome = run_trial(
                    u,
                    trial,
                    filtered,
                    feedback_store,
                    test_store,
                    m=config.m,
                    k_max=k_max,
                    khat=config.khat,
                    flip_prob=config.flip_prob,
                    rng=rng,
                    first_ranked=first_ranked,
                    refined_counter=refined_ops if config.count_ops else None,
                    control_counter=control_ops if config.count_ops else None,
                )
                seed_outcomes.append(outcome)

        if not seed_outcomes:
            continue
        n_trials += len(seed_outcomes)
        failures += sum(1 for o in seed_outcomes if o.failed)
        all_outcomes += seed_outcomes
        for k in k_list:
            per_seed_refined[k].append(
                float(np.mean([o.refined_recall(k) for o in seed_outcomes]))
            )
            per_seed_control[k].append(
                float(np.mean([o.control_recall(k) for o in seed_outcomes]))
            )
        defined = [o for o in seed_outcomes if o.total_positives >= 1]
        if defined:
            per_seed_refined_map.append(
                float(np.mean([o.refined_map_at_r() for o in defined]))
            )
            per_seed_control_map.append(
                float(np.mean([o.control_map_at_r() for o in defined]))
            )

    return EvalReport(
        task=config.task.value,
        m=config.m,
        khat="all" if config.khat is None else config.khat,
        k_list=k_list,
        seeds=config.seeds,
        refined_recall={k: aggregate(v) for k, v in per_seed_refined.items()},
        control_recall={k: aggregate(v) for k, v in per_seed_control.items()},
        refined_map_at_r=aggregate(per_seed_refined_map)
        if per_seed_refined_map
        else (0.0, 0.0),
        control_map_at_r=aggregate(per_seed_control_map)
        if per_seed_control_map
        else (0.0, 0.0),
        failures=failures,
        trials=n_trials,
        op_counts={
            "refined_similarity_evals": refined_ops.similarity_evals,
            "control_similarity_evals": control_ops.similarity_evals,
        },
        outcomes=all_outcomes,
    )
