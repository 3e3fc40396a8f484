"""Feature store and label manifest: on-disk formats and in-memory containers.

Binary embedding file (``.rfe``): magic ``RFE1``, then little-endian
u32 version (=1), u32 dim, u64 count, followed by ``count * dim`` float32
values in row-major order. Item ids are not stored in the binary file;
they come from the companion ``.jsonl`` manifest, line i <-> row i.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    DuplicateId,
    MissingField,
    PairingError,
    ZeroVector,
)

MAGIC = b"RFE1"
VERSION = 1
_HEADER = struct.Struct("<4sIIQ")

# Vectors whose norm is already within this tolerance of 1 are kept bit-exact
# instead of being re-divided, so write->load roundtrips are the identity.
NORM_TOL = 1e-6


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    """L2-normalize rows of a float array, returning float32.

    Raises ZeroVector (with offending row indices) for rows with norm < 1e-12.
    Rows already unit-norm within NORM_TOL are passed through unchanged.
    """
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim != 2:
        raise DimMismatch("expected a 2-D array of row vectors")
    norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
    dead = np.flatnonzero(norms < 1e-12)
    if dead.size:
        raise ZeroVector(dead.tolist())
    out = vectors.copy()
    needs = np.abs(norms - 1.0) > NORM_TOL
    if np.any(needs):
        scaled = vectors[needs].astype(np.float64) / norms[needs, None]
        out[needs] = scaled.astype(np.float32)
    return out


@dataclass(frozen=True)
class FeatureStore:
    """Immutable matrix of unit-norm feature vectors with stable item ids."""

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, dim) float32, rows unit-norm

    def __post_init__(self):
        if len(self.ids) != self.vectors.shape[0]:
            raise DimMismatch("id count does not match vector count")
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateId("feature store ids must be unique")
        object.__setattr__(self, "_row_of", {i: r for r, i in enumerate(self.ids)})
        object.__setattr__(self, "_f64", None)

    @classmethod
    def from_vectors(cls, vectors, ids: Sequence[str] | None = None) -> "FeatureStore":
        vectors = normalize_rows(np.asarray(vectors))
        if ids is None:
            ids = tuple(f"item_{i:06d}" for i in range(vectors.shape[0]))
        return cls(ids=tuple(ids), vectors=vectors)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    def row_of(self, item_id: str) -> int:
        return self._row_of[item_id]

    def __contains__(self, item_id: str) -> bool:
        return item_id in self._row_of

    def vector(self, item_id: str) -> np.ndarray:
        return self.vectors[self.row_of(item_id)]

    def matrix64(self) -> np.ndarray:
        """Cached float64 view used for similarity accumulation."""
        if self._f64 is None:
            object.__setattr__(self, "_f64", self.vectors.astype(np.float64))
        return self._f64

    def select(self, ids: Iterable[str]) -> "FeatureStore":
        """Sub-store with the given ids, in the given order, rows re-indexed."""
        ids = tuple(ids)
        rows = [self.row_of(i) for i in ids]
        return FeatureStore(ids=ids, vectors=self.vectors[rows])


@dataclass(frozen=True)
class CorpusItem:
    item_id: str
    labels: frozenset[str]
    adj: str | None = None
    noun: str | None = None
    image_uri: str | None = None

    @property
    def caption(self) -> tuple[str, ...]:
        """Full label set as a canonical (sorted) tuple; the stratification key."""
        return tuple(sorted(self.labels))


@dataclass(frozen=True)
class LabeledCorpus:
    items: tuple[CorpusItem, ...]
    by_id: dict[str, CorpusItem] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self.by_id:
            object.__setattr__(self, "by_id", {it.item_id: it for it in self.items})
        if len(self.by_id) != len(self.items):
            raise DuplicateId("corpus item ids must be unique")

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.by_id

    def __getitem__(self, item_id: str) -> CorpusItem:
        return self.by_id[item_id]

    def ids(self) -> tuple[str, ...]:
        return tuple(it.item_id for it in self.items)


def load_embeddings(path, ids: Sequence[str] | None = None) -> FeatureStore:
    """Load a ``.rfe`` file. All vectors are L2-normalized on the way in.

    Ids default to positional placeholders; pass the manifest's ids to get
    stable naming (see load_pair).
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise BadMagic(f"{path}: file shorter than header")
    magic, version, dim, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagic(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise BadMagic(f"{path}: unsupported version {version}")
    payload = data[_HEADER.size:]
    expected = count * dim * 4
    if len(payload) != expected:
        raise DimMismatch(
            f"{path}: payload is {len(payload)} bytes, expected {expected} "
            f"for {count} x {dim} float32"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    if ids is not None and len(ids) != count:
        raise PairingError(f"{path}: {len(ids)} ids for {count} rows")
    return FeatureStore.from_vectors(vectors, ids)


def write_embeddings(store: FeatureStore, path) -> None:
    """Write a ``.rfe`` file; load_embeddings reproduces the vectors bit-exactly."""
    n, dim = store.vectors.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, n))
        fh.write(np.ascontiguousarray(store.vectors, dtype="<f4").tobytes())


def load_manifest(path) -> LabeledCorpus:
    """Load a ``.jsonl`` manifest, preserving file order."""
    items: list[CorpusItem] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "id" not in rec:
                raise MissingField(f"{path}:{lineno}: missing 'id'")
            if "labels" not in rec:
                raise MissingField(f"{path}:{lineno}: missing 'labels'")
            item_id = str(rec["id"])
            if item_id in seen:
                raise DuplicateId(f"{path}:{lineno}: duplicate id {item_id!r}")
            seen.add(item_id)
            labels = frozenset(str(l).strip() for l in rec["labels"])
            adj = rec.get("adj")
            noun = rec.get("noun")
            for name, value in (("adj", adj), ("noun", noun)):
                if value is not None and value not in labels:
                    raise MissingField(
                        f"{path}:{lineno}: {name}={value!r} not present in labels"
                    )
            items.append(
                CorpusItem(
                    item_id=item_id,
                    labels=labels,
                    adj=adj,
                    noun=noun,
                    image_uri=rec.get("image_uri"),
                )
            )
    return LabeledCorpus(items=tuple(items))


def write_manifest(corpus: LabeledCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for it in corpus.items:
            rec: dict = {"id": it.item_id, "labels": sorted(it.labels)}
            if it.adj is not None:
                rec["adj"] = it.adj
            if it.noun is not None:
                rec["noun"] = it.noun
            if it.image_uri is not None:
                rec["image_uri"] = it.image_uri
            fh.write(json.dumps(rec) + "\n")


def load_pair(embeddings_path, manifest_path) -> tuple[FeatureStore, LabeledCorpus]:
    """Load embeddings + manifest, binding ids by line order and checking the pairing."""
    corpus = load_manifest(manifest_path)
    store = load_embeddings(embeddings_path, ids=corpus.ids())
    return store, corpus


def check_pairing(store: FeatureStore, corpus: LabeledCorpus) -> None:
    """Fail loudly unless the id sets are equal."""
    store_ids = set(store.ids)
    corpus_ids = set(corpus.by_id)
    if store_ids != corpus_ids:
        only_store = sorted(store_ids - corpus_ids)[:5]
        only_corpus = sorted(corpus_ids - store_ids)[:5]
        raise PairingError(
            f"id sets differ (store-only: {only_store}, manifest-only: {only_corpus})"
        )
