"""Seeded synthetic corpora: Gaussian blobs around unit-sphere class means.

A desk-scale stand-in for encoder features, so the harness and the service
run with zero external data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import SeparationInfeasible
from ..store import CorpusItem, FeatureStore, LabeledCorpus, normalize_rows

_MAX_ATTEMPTS_PER_CLASS = 2000


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    n_classes: int
    samples_per_class: int
    dim: int
    class_separation: float = 0.8  # min pairwise Euclidean distance between means
    noise_sigma: float = 0.2
    seed: int = 0
    pair_labels: bool = False  # label classes as (adjective, noun) pairs

    def __post_init__(self):
        if self.n_classes < 1 or self.samples_per_class < 1 or self.dim < 1:
            raise ValueError("all counts must be positive")
        if self.class_separation <= 0:
            raise ValueError("separation must be > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def _class_means(spec: SyntheticCorpusSpec, rng: np.random.Generator) -> np.ndarray:
    means: list[np.ndarray] = []
    attempts = 0
    budget = _MAX_ATTEMPTS_PER_CLASS * spec.n_classes
    while len(means) < spec.n_classes:
        if attempts >= budget:
            raise SeparationInfeasible(
                f"could not place {spec.n_classes} means at separation "
                f">= {spec.class_separation} in dim {spec.dim}"
            )
        attempts += 1
        cand = rng.standard_normal(spec.dim)
        cand /= np.linalg.norm(cand)
        if all(np.linalg.norm(cand - m) >= spec.class_separation for m in means):
            means.append(cand)
    return np.stack(means)


def _class_names(spec: SyntheticCorpusSpec) -> list[tuple[frozenset[str], str | None, str | None]]:
    """Per-class (labels, adj, noun)."""
    out = []
    if spec.pair_labels:
        n_adj = max(2, round(math.sqrt(spec.n_classes)))
        for i in range(spec.n_classes):
            adj = f"adj{i % n_adj:02d}"
            noun = f"noun{i // n_adj:02d}"
            out.append((frozenset({adj, noun}), adj, noun))
    else:
        for i in range(spec.n_classes):
            out.append((frozenset({f"class_{i:03d}"}), None, None))
    return out


def generate_synthetic_corpus(
    spec: SyntheticCorpusSpec,
) -> tuple[FeatureStore, LabeledCorpus]:
    """Deterministic (by seed) clustered corpus on the unit sphere."""
    rng = np.random.default_rng(spec.seed)
    means = _class_means(spec, rng)
    names = _class_names(spec)

    vectors = np.empty((spec.n_classes * spec.samples_per_class, spec.dim), np.float64)
    ids: list[str] = []
    items: list[CorpusItem] = []
    row = 0
    for c in range(spec.n_classes):
        labels, adj, noun = names[c]
        noise = rng.standard_normal((spec.samples_per_class, spec.dim))
        vectors[row : row + spec.samples_per_class] = (
            means[c] + spec.noise_sigma * noise
        )
        for j in range(spec.samples_per_class):
            item_id = f"c{c:03d}_s{j:04d}"
            ids.append(item_id)
            items.append(CorpusItem(item_id=item_id, labels=labels, adj=adj, noun=noun))
        row += spec.samples_per_class

    store = FeatureStore(ids=tuple(ids), vectors=normalize_rows(vectors))
    return store, LabeledCorpus(items=tuple(items))
