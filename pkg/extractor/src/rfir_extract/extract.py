"""Convert an image directory + label table into the .rfe/.jsonl pair.

Output row i of the binary file corresponds to manifest line i; ids are the
image paths relative to the image directory, so a retrieval service can use
them as image_uri values. Vectors are written unnormalized; the consumer
normalizes at load.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .encoders import get_encoder

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}
_HEADER = struct.Struct("<4sIIQ")
MAGIC = b"RFE1"
VERSION = 1


class MissingLabelRecord(Exception):
    """An image has no row in the label source."""


@dataclass(frozen=True)
class LabelRecord:
    labels: list[str]
    adj: str | None = None
    noun: str | None = None


@dataclass
class ExtractionJob:
    image_dir: Path
    label_path: Path
    encoder_name: str = "patch-mean-16"
    batch_size: int = 32
    out_prefix: str = "features"


@dataclass
class ExtractionResult:
    rfe_path: Path
    manifest_path: Path
    count: int
    dim: int
    skipped: list[str] = field(default_factory=list)


def load_labels(path: Path) -> dict[str, LabelRecord]:
    """Label source: CSV with columns path,labels[,adj,noun] (labels joined
    by '|'), or JSONL with fields id/labels[/adj/noun]."""
    records: dict[str, LabelRecord] = {}
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                records[row["path"]] = LabelRecord(
                    labels=[l for l in row["labels"].split("|") if l],
                    adj=row.get("adj") or None,
                    noun=row.get("noun") or None,
                )
    else:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                records[rec["id"]] = LabelRecord(
                    labels=list(rec["labels"]),
                    adj=rec.get("adj"),
                    noun=rec.get("noun"),
                )
    return records


def list_images(image_dir: Path) -> list[Path]:
    """Relative image paths in deterministic (sorted) order."""
    return sorted(
        p.relative_to(image_dir)
        for p in image_dir.rglob("*")
        if p.suffix.lower() in IMAGE_SUFFIXES
    )


def extract(job: ExtractionJob) -> ExtractionResult:
    encoder = get_encoder(job.encoder_name)
    labels = load_labels(job.label_path)
    paths = list_images(job.image_dir)
    if not paths:
        raise FileNotFoundError(f"no images under {job.image_dir}")

    unlabeled = [str(p) for p in paths if str(p) not in labels]
    if unlabeled:
        raise MissingLabelRecord(f"no label record for: {unlabeled[:10]}")

    rows: list[np.ndarray] = []
    manifest_lines: list[str] = []
    skipped: list[str] = []
    batch_imgs: list[Image.Image] = []
    batch_paths: list[Path] = []

    def flush():
        if not batch_imgs:
            return
        feats = encoder.encode_batch(batch_imgs)
        for vec, rel in zip(feats, batch_paths):
            rec = labels[str(rel)]
            entry: dict = {
                "id": str(rel),
                "labels": rec.labels,
                "image_uri": str(job.image_dir / rel),
            }
            if rec.adj is not None:
                entry["adj"] = rec.adj
            if rec.noun is not None:
                entry["noun"] = rec.noun
            rows.append(vec)
            manifest_lines.append(json.dumps(entry))
        batch_imgs.clear()
        batch_paths.clear()

    for rel in paths:
        try:
            img = Image.open(job.image_dir / rel)
            img.load()
        except Exception:
            skipped.append(str(rel))
            continue
        batch_imgs.append(img)
        batch_paths.append(rel)
        if len(batch_imgs) >= job.batch_size:
            flush()
    flush()

    matrix = np.stack(rows).astype("<f4") if rows else np.empty((0, encoder.dim), "<f4")
    rfe_path = Path(f"{job.out_prefix}.rfe")
    manifest_path = Path(f"{job.out_prefix}.jsonl")
    with open(rfe_path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, encoder.dim, matrix.shape[0]))
        fh.write(matrix.tobytes())
    manifest_path.write_text(
        "".join(line + "\n" for line in manifest_lines), encoding="utf-8"
    )
    return ExtractionResult(
        rfe_path=rfe_path,
        manifest_path=manifest_path,
        count=matrix.shape[0],
        dim=encoder.dim,
        skipped=skipped,
    )
