"""Image encoders behind a common interface.

Images are resized to 256x256 and center-cropped to 224x224 before encoding.
The ``patch-mean-*`` encoders are deterministic, dependency-free stand-ins
(grayscale patch averages) so the pipeline runs without model downloads;
the ``clip-*`` names load pretrained vision encoders when torch/transformers
and their weights are available.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


class EncoderLoadFailure(Exception):
    """The requested encoder could not be constructed."""


RESIZE = 256
CROP = 224


def preprocess(img: Image.Image) -> Image.Image:
    img = img.convert("RGB").resize((RESIZE, RESIZE), Image.BILINEAR)
    left = (RESIZE - CROP) // 2
    return img.crop((left, left, left + CROP, left + CROP))


class PatchMeanEncoder:
    """Grayscale patch-average features on a grid x grid layout."""

    def __init__(self, grid: int):
        self.grid = grid
        self.dim = grid * grid
        self.name = f"patch-mean-{self.dim}"

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        out = np.empty((len(images), self.dim), np.float32)
        for i, img in enumerate(images):
            arr = np.asarray(preprocess(img).convert("L"), np.float32) / 255.0
            step = CROP // self.grid
            trimmed = arr[: step * self.grid, : step * self.grid]
            patches = trimmed.reshape(self.grid, step, self.grid, step)
            out[i] = patches.mean(axis=(1, 3)).ravel()
        return out


class ClipEncoder:
    """Pretrained CLIP image tower via transformers; weights must be present."""

    CHECKPOINTS = {
        "clip-vit-b32": ("openai/clip-vit-base-patch32", 512),
        "clip-vit-b16": ("openai/clip-vit-base-patch16", 512),
        "clip-vit-l14": ("openai/clip-vit-large-patch14", 768),
    }

    def __init__(self, name: str):
        checkpoint, dim = self.CHECKPOINTS[name]
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise EncoderLoadFailure(f"torch/transformers unavailable: {exc}")
        try:
            self._model = CLIPModel.from_pretrained(checkpoint)
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise EncoderLoadFailure(f"could not load {checkpoint}: {exc}")
        self._torch = torch
        self._model.eval()
        self.name = name
        self.dim = dim

    def encode_batch(self, images: list[Image.Image]) -> np.ndarray:
        inputs = self._processor(
            images=[preprocess(img) for img in images], return_tensors="pt"
        )
        with self._torch.no_grad():
            feats = self._model.get_image_features(**inputs)
        return feats.numpy().astype(np.float32)


def get_encoder(name: str):
    if name.startswith("patch-mean-"):
        dim = int(name.removeprefix("patch-mean-"))
        grid = int(round(dim**0.5))
        if grid * grid != dim:
            raise EncoderLoadFailure(f"{name}: dim must be a perfect square")
        return PatchMeanEncoder(grid)
    if name in ClipEncoder.CHECKPOINTS:
        return ClipEncoder(name)
    raise EncoderLoadFailure(
        f"unknown encoder {name!r}; choose patch-mean-<n*n> or one of "
        f"{sorted(ClipEncoder.CHECKPOINTS)}"
    )
