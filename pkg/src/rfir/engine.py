"""Exact cosine retrieval, the 1-NN preference classifier, and refined retrieval.

The plain retrieval ranks a store by cosine similarity to the query. After
one round of binary feedback, a 1-NN classifier over the rated vectors
predicts preference for unseen items; refined retrieval ranks a large
candidate pool, keeps the candidates the classifier accepts, and returns
the top-k of what survives. An empty surviving set is a failure outcome,
not an exception.

Similarities are accumulated in float64 even though storage is float32;
ties (exact float64 equality) break by ascending row index, so rankings
are deterministic and schedule-independent.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .errors import DimMismatch, DuplicateId, EmptyFeedback, EmptyStore, ZeroVector
from .store import FeatureStore


@dataclass(frozen=True)
class RankedEntry:
    item_id: str
    row_index: int
    score: float


@dataclass(frozen=True)
class RankedList:
    """Ordered retrieval result; scores non-increasing, ties by row index."""

    entries: tuple[RankedEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i) -> RankedEntry:
        return self.entries[i]

    def ids(self) -> list[str]:
        return [e.item_id for e in self.entries]

    def scores(self) -> list[float]:
        return [e.score for e in self.entries]


@dataclass(frozen=True)
class FailureSignal:
    """Refined retrieval kept no candidates; the trial counts as a failure."""

    reason: str = "no preferred candidates"


@dataclass(frozen=True)
class FeedbackSet:
    """Rated items from the first retrieval: (item_id, vector, bit) triples."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dim) float32 unit rows
    bits: np.ndarray  # (n,) uint8 in {0, 1}

    def __post_init__(self):
        if len(self.ids) == 0:
            raise EmptyFeedback("feedback set must be non-empty")
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateId("feedback item ids must be unique")
        if not (len(self.ids) == self.vectors.shape[0] == self.bits.shape[0]):
            raise DimMismatch("feedback ids/vectors/bits lengths disagree")
        if not np.all((self.bits == 0) | (self.bits == 1)):
            raise ValueError("feedback bits must be 0 or 1")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_positive(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def from_ranked(cls, ranked: RankedList, store: FeatureStore, bits) -> "FeedbackSet":
        bits = np.asarray(bits, dtype=np.uint8)
        if len(bits) != len(ranked):
            raise DimMismatch("one bit per ranked entry required")
        rows = [e.row_index for e in ranked]
        return cls(
            ids=tuple(ranked.ids()),
            vectors=store.vectors[rows].copy(),
            bits=bits,
        )


@dataclass
class OpCounter:
    """Counts cosine-similarity evaluations and wall time per phase."""

    similarity_evals: int = 0
    phase_seconds: dict[str, float] = field(default_factory=dict)

    def count(self, n: int) -> None:
        self.similarity_evals += int(n)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.phase_seconds[name] = (
                self.phase_seconds.get(name, 0.0) + time.perf_counter() - start
            )

    def merge(self, other: "OpCounter") -> None:
        self.similarity_evals += other.similarity_evals
        for name, secs in other.phase_seconds.items():
            self.phase_seconds[name] = self.phase_seconds.get(name, 0.0) + secs


def as_query(vector, dim: int | None = None) -> np.ndarray:
    """Validate and unit-normalize a query vector, returned as float64."""
    u = np.asarray(vector, dtype=np.float64).ravel()
    if dim is not None and u.shape[0] != dim:
        raise DimMismatch(f"query has dim {u.shape[0]}, store has dim {dim}")
    norm = np.linalg.norm(u)
    if norm < 1e-12:
        raise ZeroVector([0])
    return u / norm


def knn_retrieve(
    u,
    m: int,
    store: FeatureStore,
    exclude: set[str] | None = None,
    counter: OpCounter | None = None,
) -> RankedList:
    """Top-m rows of the store by cosine similarity to u.

    The full store is scanned (|store| similarity evaluations); excluded ids
    are dropped after scoring. Ties break by ascending row index.
    """
    if len(store) == 0:
        raise EmptyStore("cannot retrieve from an empty store")
    if m < 1:
        raise ValueError("m must be >= 1")
    u = as_query(u, store.dim)
    scores = store.matrix64() @ u
    if counter is not None:
        counter.count(len(store))
    order = np.argsort(-scores, kind="stable")
    if exclude:
        order = [r for r in order if store.ids[r] not in exclude]
    entries = tuple(
        RankedEntry(item_id=store.ids[r], row_index=int(r), score=float(scores[r]))
        for r in order[:m]
    )
    return RankedList(entries=entries)


class PreferenceClassifier(BaseEstimator, ClassifierMixin):
    """1-NN preference predictor over the rated feedback vectors.

    fit() just stores the feedback: there is no training step, which is what
    makes the online update free. predict() returns, for each input vector,
    the bit of the most-cosine-similar feedback entry (ties by ascending
    feedback index).
    """

    def fit(self, X, y) -> "PreferenceClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.uint8).ravel()
        if X.ndim != 2 or X.shape[0] == 0:
            raise EmptyFeedback("need a non-empty 2-D feedback matrix")
        if X.shape[0] != y.shape[0]:
            raise DimMismatch("X and y lengths disagree")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0/1 bits")
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms < 1e-12):
            raise ZeroVector(np.flatnonzero(norms < 1e-12).tolist())
        self.X_ = X / norms[:, None]
        self.y_ = y
        self.n_features_in_ = X.shape[1]
        return self

    def fit_feedback(self, fb: FeedbackSet) -> "PreferenceClassifier":
        return self.fit(fb.vectors, fb.bits)

    def _check_fitted(self):
        if not hasattr(self, "X_"):
            raise NotFittedError("classifier has no feedback yet; call fit")

    def predict(self, X, counter: OpCounter | None = None) -> np.ndarray:
        self._check_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise DimMismatch(
                f"input dim {X.shape[1]} != feedback dim {self.n_features_in_}"
            )
        # Candidates need not be renormalized: argmax of cosine is invariant
        # to the candidate's own positive scale.
        sims = self.X_ @ X.T  # (n_feedback, n_candidates)
        if counter is not None:
            counter.count(sims.size)
        nearest = np.argmax(sims, axis=0)  # first index wins ties
        return self.y_[nearest]

    def classify(self, a) -> int:
        """Single-vector convenience around predict."""
        return int(self.predict(np.asarray(a).reshape(1, -1))[0])


def build_classifier(fb: FeedbackSet) -> PreferenceClassifier:
    return PreferenceClassifier().fit_feedback(fb)


def refined_retrieve(
    u,
    k: int,
    khat: int,
    store2: FeatureStore,
    clf: PreferenceClassifier,
    exclude: set[str] | None = None,
    counter: OpCounter | None = None,
) -> RankedList | FailureSignal:
    """Feedback-refined retrieval: rank a pool of khat candidates, keep those
    the classifier accepts (rank order preserved), return the first k.

    Returns FailureSignal when no candidate survives; a list shorter than k
    when fewer than k survive.
    """
    if not (1 <= k <= khat <= len(store2)):
        raise ValueError(
            f"need 1 <= k <= khat <= |store|, got k={k}, khat={khat}, |store|={len(store2)}"
        )
    candidates = knn_retrieve(u, khat, store2, exclude=exclude, counter=counter)
    rows = [e.row_index for e in candidates]
    bits = clf.predict(store2.vectors[rows], counter=counter)
    kept = tuple(e for e, b in zip(candidates, bits) if b == 1)
    if not kept:
        return FailureSignal()
    return RankedList(entries=kept[:k])


def control_retrieve(
    u,
    k: int,
    store2: FeatureStore,
    exclude: set[str] | None = None,
    counter: OpCounter | None = None,
) -> RankedList:
    """Plain K-NN over the test store; the no-feedback control arm."""
    return knn_retrieve(u, k, store2, exclude=exclude, counter=counter)


def expected_refined_ops(khat: int, m: int, n_store2: int) -> int:
    """Similarity evaluations one refined retrieval performs: khat*m + |store2|."""
    return khat * m + n_store2
