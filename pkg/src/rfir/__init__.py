"""Vector-similarity retrieval with one-round binary relevance feedback."""

from .engine import (
    FailureSignal,
    FeedbackSet,
    OpCounter,
    PreferenceClassifier,
    RankedEntry,
    RankedList,
    build_classifier,
    control_retrieve,
    knn_retrieve,
    refined_retrieve,
)
from .store import (
    CorpusItem,
    FeatureStore,
    LabeledCorpus,
    load_embeddings,
    load_manifest,
    load_pair,
    write_embeddings,
    write_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "FailureSignal",
    "FeedbackSet",
    "OpCounter",
    "PreferenceClassifier",
    "RankedEntry",
    "RankedList",
    "build_classifier",
    "control_retrieve",
    "knn_retrieve",
    "refined_retrieve",
    "CorpusItem",
    "FeatureStore",
    "LabeledCorpus",
    "load_embeddings",
    "load_manifest",
    "load_pair",
    "write_embeddings",
    "write_manifest",
]
