import numpy as np
import pytest

from rfir import FeatureStore, knn_retrieve
from rfir.errors import EmptyAfterFilter, SeparationInfeasible, StratumTooSmall
from rfir.harness import (
    SyntheticCorpusSpec,
    TaskKind,
    TaskTrial,
    TaskRunConfig,
    enumerate_trials,
    filter_corpus,
    generate_synthetic_corpus,
    run_task,
    run_trial,
    simulate_feedback,
    split_corpus,
)
from rfir.harness.splits import allocate_122
from rfir.store import CorpusItem, LabeledCorpus


def corpus_of(*specs):
    """specs: (id, labels, adj, noun)"""
    items = []
    for spec in specs:
        item_id, labels = spec[0], frozenset(spec[1])
        adj = spec[2] if len(spec) > 2 else None
        noun = spec[3] if len(spec) > 3 else None
        items.append(CorpusItem(item_id=item_id, labels=labels, adj=adj, noun=noun))
    return LabeledCorpus(items=tuple(items))


def repeated(caption, n, prefix):
    return [(f"{prefix}{i}", caption) for i in range(n)]


class TestFilterCorpus:
    def test_rare_caption_removed(self):
        corpus = corpus_of(
            ("a", ["molten", "orange"], "molten", "orange"),
            ("b", ["molten", "orange"], "molten", "orange"),
            *repeated(["ripe", "apple"], 5, "r"),
        )
        out = filter_corpus(corpus)
        assert "a" not in out and "b" not in out
        assert len(out) == 5

    def test_caption_on_exactly_five_kept(self):
        corpus = corpus_of(*repeated(["x"], 5, "k"))
        assert len(filter_corpus(corpus)) == 5

    def test_literal_adj_label_removed(self):
        corpus = corpus_of(
            ("bad", ["adj", "apple"], "adj", "apple"),
            *repeated(["ripe", "apple"], 5, "r"),
        )
        out = filter_corpus(corpus)
        assert "bad" not in out

    def test_empty_after_filter(self):
        with pytest.raises(EmptyAfterFilter):
            filter_corpus(corpus_of(("a", ["solo"])))


class TestSplitCorpus:
    def test_allocation_five(self):
        assert allocate_122(5) == (1, 2, 2)

    def test_allocation_seven_largest_remainder(self):
        assert allocate_122(7) == (1, 3, 3)

    def test_allocation_sums(self):
        for n in range(5, 60):
            assert sum(allocate_122(n)) == n

    def test_deterministic(self):
        corpus = corpus_of(*repeated(["a"], 9, "a"), *repeated(["b"], 6, "b"))
        s1 = split_corpus(corpus, 3)
        s2 = split_corpus(corpus, 3)
        assert s1 == s2

    def test_different_seeds_differ(self):
        corpus = corpus_of(*repeated(["a"], 20, "a"))
        assert split_corpus(corpus, 0) != split_corpus(corpus, 1)

    def test_disjoint_covering_ratio(self):
        corpus = corpus_of(*repeated(["a"], 12, "a"), *repeated(["b"], 7, "b"))
        for seed in range(10):
            split = split_corpus(corpus, seed)
            q, f, t = (
                set(split.query_ids),
                set(split.feedback_db_ids),
                set(split.test_db_ids),
            )
            assert not (q & f or q & t or f & t)
            assert q | f | t == set(corpus.by_id)
            assert split.allocation[("a",)] == allocate_122(12)
            assert split.allocation[("b",)] == allocate_122(7)

    def test_stratum_too_small(self):
        corpus = corpus_of(*repeated(["a"], 3, "a"))
        with pytest.raises(StratumTooSmall):
            split_corpus(corpus, 0)


class TestTrials:
    def test_category_single_trial(self):
        q = CorpusItem("q", frozenset({"bird"}))
        corpus = corpus_of(("q", ["bird"]))
        trials = enumerate_trials(q, TaskKind.CATEGORY, corpus, ())
        assert len(trials) == 1
        assert trials[0].target == frozenset({"bird"})

    def test_one_label_one_trial_per_label(self):
        q = CorpusItem("q", frozenset({"boy", "hat", "door"}))
        corpus = corpus_of(("q", ["boy", "hat", "door"]))
        trials = enumerate_trials(q, TaskKind.ONE_LABEL, corpus, ())
        assert len(trials) == 3
        assert {t.target for t in trials} == {"boy", "hat", "door"}

    def test_one_label_positivity(self):
        trial = TaskTrial("q", TaskKind.ONE_LABEL, "hat")
        assert trial.is_positive(CorpusItem("x", frozenset({"boy", "hat"})))
        assert not trial.is_positive(CorpusItem("y", frozenset({"door"})))

    def test_conditioned_positivity(self):
        trial = TaskTrial("q", TaskKind.CONDITIONED, ("unripe", "apple"))
        assert trial.is_positive(
            CorpusItem("x", frozenset({"unripe", "apple"}), "unripe", "apple")
        )
        assert not trial.is_positive(
            CorpusItem("y", frozenset({"ripe", "apple"}), "ripe", "apple")
        )

    def test_conditioned_enumeration_prunes_zero_positive(self):
        corpus = corpus_of(
            ("q", ["ripe", "apple"], "ripe", "apple"),
            ("t1", ["unripe", "apple"], "unripe", "apple"),
            ("t2", ["rotten", "pear"], "rotten", "pear"),
        )
        trials = enumerate_trials(
            corpus["q"], TaskKind.CONDITIONED, corpus, ("t1", "t2")
        )
        # "rotten" exists as an adjective but never with noun "apple"
        assert [t.target for t in trials] == [("unripe", "apple")]

    def test_conditioned_count_bound(self):
        # adjectives minus the query's own, before positivity pruning
        items = [("q", ["ripe", "apple"], "ripe", "apple")]
        for i in range(6):
            items.append((f"d{i}", [f"adj_{i}", "apple"], f"adj_{i}", "apple"))
        corpus = corpus_of(*items)
        test_ids = tuple(f"d{i}" for i in range(6))
        trials = enumerate_trials(corpus["q"], TaskKind.CONDITIONED, corpus, test_ids)
        assert len(trials) == 6  # 7 adjectives total, minus "ripe"


class TestSimulateFeedback:
    def setup_method(self):
        self.store = FeatureStore.from_vectors(
            np.random.default_rng(0).standard_normal((6, 4)),
            ids=tuple("abcdef"),
        )
        self.corpus = corpus_of(
            ("a", ["cat"]),
            ("b", ["cat"]),
            ("c", ["dog"]),
            ("d", ["cat"]),
            ("e", ["dog"]),
            ("f", ["cat"]),
        )

    def test_bits_equal_predicate(self):
        ranked = knn_retrieve(self.store.vectors[0], 6, self.store)
        trial = TaskTrial("a", TaskKind.CATEGORY, frozenset({"cat"}))
        fb = simulate_feedback(ranked, trial, self.corpus, self.store)
        for item_id, bit in zip(fb.ids, fb.bits):
            assert bit == (1 if "cat" in self.corpus[item_id].labels else 0)

    def test_all_shared_label_gives_all_ones(self):
        ranked = knn_retrieve(self.store.vectors[0], 6, self.store)
        trial = TaskTrial("a", TaskKind.ONE_LABEL, "cat")
        fb = simulate_feedback(ranked, trial, self.corpus, self.store)
        cats = [i for i in fb.ids if "cat" in self.corpus[i].labels]
        assert fb.n_positive == len(cats) == 4

    def test_flip_prob_one_inverts_everything(self):
        ranked = knn_retrieve(self.store.vectors[0], 6, self.store)
        trial = TaskTrial("a", TaskKind.ONE_LABEL, "cat")
        clean = simulate_feedback(ranked, trial, self.corpus, self.store)
        flipped = simulate_feedback(
            ranked, trial, self.corpus, self.store,
            flip_prob=1.0, rng=np.random.default_rng(0),
        )
        assert np.all(flipped.bits == 1 - clean.bits)


class TestSynthetic:
    def test_zero_noise_samples_equal_means(self):
        spec = SyntheticCorpusSpec(
            n_classes=3, samples_per_class=4, dim=8, noise_sigma=0.0, seed=0
        )
        store, corpus = generate_synthetic_corpus(spec)
        for c in range(3):
            block = store.vectors[c * 4 : (c + 1) * 4]
            assert np.all(block == block[0])

    def test_two_antipodal_classes(self):
        spec = SyntheticCorpusSpec(
            n_classes=2, samples_per_class=2, dim=2,
            class_separation=1.99, noise_sigma=0.0, seed=1,
        )
        store, _ = generate_synthetic_corpus(spec)
        assert float(store.vectors[0] @ store.vectors[2]) == pytest.approx(-1.0, abs=0.02)

    def test_seed_determinism_bit_identical(self):
        spec = SyntheticCorpusSpec(n_classes=4, samples_per_class=5, dim=6, seed=9)
        s1, c1 = generate_synthetic_corpus(spec)
        s2, c2 = generate_synthetic_corpus(spec)
        assert s1.vectors.tobytes() == s2.vectors.tobytes()
        assert c1 == c2

    def test_separation_infeasible(self):
        spec = SyntheticCorpusSpec(
            n_classes=50, samples_per_class=1, dim=2, class_separation=1.9
        )
        with pytest.raises(SeparationInfeasible):
            generate_synthetic_corpus(spec)

    def test_pair_labels_have_adj_noun(self):
        spec = SyntheticCorpusSpec(
            n_classes=6, samples_per_class=5, dim=8, pair_labels=True
        )
        _, corpus = generate_synthetic_corpus(spec)
        for item in corpus.items:
            assert item.adj in item.labels and item.noun in item.labels


class TestRunTask:
    @classmethod
    def setup_class(cls):
        cls.spec = SyntheticCorpusSpec(
            n_classes=6, samples_per_class=15, dim=16,
            class_separation=0.8, noise_sigma=0.3, seed=5,
        )
        cls.store, cls.corpus = generate_synthetic_corpus(cls.spec)

    def test_perfectly_separated_classes_are_perfect(self):
        spec = SyntheticCorpusSpec(
            n_classes=4, samples_per_class=10, dim=8, noise_sigma=0.0, seed=2
        )
        store, corpus = generate_synthetic_corpus(spec)
        report = run_task(
            store, corpus,
            TaskRunConfig(task=TaskKind.CATEGORY, m=10, k_list=(1,), seeds=(0, 1)),
        )
        assert report.refined_recall[1][0] == 1.0
        assert report.control_recall[1][0] == 1.0

    def test_deterministic_given_inputs(self):
        config = TaskRunConfig(task=TaskKind.CATEGORY, m=10, seeds=(0, 1))
        r1 = run_task(self.store, self.corpus, config)
        r2 = run_task(self.store, self.corpus, config)
        assert r1.to_dict() == r2.to_dict()

    def test_refined_beats_or_ties_control_on_clusters(self):
        config = TaskRunConfig(task=TaskKind.CATEGORY, m=25, seeds=(0, 1, 2))
        report = run_task(self.store, self.corpus, config)
        assert report.refined_recall[1][0] >= report.control_recall[1][0]

    def test_one_label_task_runs(self):
        spec = SyntheticCorpusSpec(
            n_classes=6, samples_per_class=10, dim=12,
            noise_sigma=0.3, seed=3, pair_labels=True,
        )
        store, corpus = generate_synthetic_corpus(spec)
        report = run_task(
            store, corpus,
            TaskRunConfig(task=TaskKind.ONE_LABEL, m=10, seeds=(0,)),
        )
        # two labels per item -> two trials per query
        assert report.trials == 2 * len(
            split_corpus(filter_corpus(corpus), 0).query_ids
        )

    def test_conditioned_task_runs(self):
        spec = SyntheticCorpusSpec(
            n_classes=6, samples_per_class=10, dim=12,
            noise_sigma=0.3, seed=3, pair_labels=True,
        )
        store, corpus = generate_synthetic_corpus(spec)
        report = run_task(
            store, corpus,
            TaskRunConfig(task=TaskKind.CONDITIONED, m=10, seeds=(0,)),
        )
        assert report.trials > 0

    def test_report_json_shape(self):
        config = TaskRunConfig(task=TaskKind.CATEGORY, m=10, seeds=(0,))
        report = run_task(self.store, self.corpus, config)
        d = report.to_dict()
        for arm in ("refined", "control"):
            assert set(d[arm]["recall"]) == {"1", "2", "4", "8"}
            assert {"mean", "std"} <= set(d[arm]["recall"]["1"])
        assert d["khat"] == "all"
        assert d["seeds"] == [0]
        assert "refined_similarity_evals" in d["op_counts"]


class TestRunTrialFailurePath:
    def test_all_negative_feedback_scores_zero(self):
        rng = np.random.default_rng(0)
        store = FeatureStore.from_vectors(
            rng.standard_normal((12, 6)), ids=tuple(f"i{n}" for n in range(12))
        )
        corpus = corpus_of(*[(f"i{n}", ["dog" if n else "cat"]) for n in range(12)])
        fb_store = store.select([f"i{n}" for n in range(1, 7)])
        test_store = store.select([f"i{n}" for n in range(7, 12)])
        trial = TaskTrial("i0", TaskKind.CATEGORY, frozenset({"cat"}))
        outcome = run_trial(
            store.vector("i0"), trial, corpus, fb_store, test_store,
            m=6, k_max=4, khat=None,
        )
        assert outcome.failed
        for k in (1, 2, 4, 8):
            assert outcome.refined_recall(k) == 0
