"""Encoder providers behind the registry.

The deterministic provider needs no downloads and exists so the protocol,
export path, and integration tests run anywhere. The real providers load
pretrained checkpoints lazily in eval mode (no dropout) and embed in fixed
batches of 64, so repeated runs of the same inputs give identical vectors.
"""

from __future__ import annotations

import hashlib
import threading

import numpy as np

from .registry import ModelRegistryEntry

BATCH_SIZE = 64


class ModelLoadError(Exception):
    pass


class InputParseError(Exception):
    pass


class DeterministicEncoder:
    """Seeded pseudo-encoder: embedding = f(model_id, text), nothing else.

    Hyperbolic entries squash vectors into the unit ball with tanh, matching
    the geometry real hyperbolic sentence encoders emit.
    """

    def __init__(self, entry: ModelRegistryEntry):
        self.entry = entry

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.entry.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            digest = hashlib.sha256(f"{self.entry.model_id}:{text}".encode("utf-8")).digest()
            seed = np.frombuffer(digest[:16], dtype=np.uint64)
            v = np.random.default_rng(seed).standard_normal(self.entry.dim)
            if self.entry.space == "hyperbolic":
                norm = float(np.linalg.norm(v))
                if norm > 0:
                    v = np.tanh(norm / self.entry.dim**0.5) * v / norm
            out[i] = v
        return out


class SentenceTransformerEncoder:
    def __init__(self, entry: ModelRegistryEntry):
        self.entry = entry
        checkpoint = entry.provider.get("checkpoint")
        if not checkpoint:
            raise ModelLoadError(f"{entry.model_id}: provider needs a checkpoint")
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(f"sentence-transformers not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(checkpoint, device="cpu")
        except Exception as exc:
            raise ModelLoadError(f"cannot load {checkpoint}: {exc}") from exc
        self._model.eval()

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        vecs = self._model.encode(
            texts,
            batch_size=BATCH_SIZE,
            convert_to_numpy=True,
            normalize_embeddings=False,
            show_progress_bar=False,
        )
        return np.asarray(vecs, dtype=np.float64)


class ClipTextEncoder:
    def __init__(self, entry: ModelRegistryEntry):
        self.entry = entry
        checkpoint = entry.provider.get("checkpoint")
        if not checkpoint:
            raise ModelLoadError(f"{entry.model_id}: provider needs a checkpoint")
        try:
            import torch
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise ModelLoadError(f"transformers/torch not installed: {exc}") from exc
        try:
            self._model = CLIPModel.from_pretrained(checkpoint)
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {checkpoint}: {exc}") from exc
        self._model.eval()
        self._torch = torch

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(texts), BATCH_SIZE):
                batch = texts[start : start + BATCH_SIZE]
                inputs = self._processor(
                    text=batch, return_tensors="pt", padding=True, truncation=True
                )
                feats = self._model.get_text_features(**inputs)
                chunks.append(feats.cpu().numpy())
        return np.concatenate(chunks).astype(np.float64)


class ClipImageEncoder:
    def __init__(self, entry: ModelRegistryEntry):
        self.entry = entry
        checkpoint = entry.provider.get("checkpoint")
        if not checkpoint:
            raise ModelLoadError(f"{entry.model_id}: provider needs a checkpoint")
        try:
            import torch
            from PIL import Image
            from transformers import CLIPModel, CLIPProcessor
        except ImportError as exc:
            raise ModelLoadError(f"transformers/torch/Pillow not installed: {exc}") from exc
        try:
            self._model = CLIPModel.from_pretrained(checkpoint)
            self._processor = CLIPProcessor.from_pretrained(checkpoint)
        except Exception as exc:
            raise ModelLoadError(f"cannot load {checkpoint}: {exc}") from exc
        self._model.eval()
        self._torch = torch
        self._image_cls = Image

    def embed_images(self, paths: list) -> np.ndarray:
        chunks = []
        with self._torch.no_grad():
            for start in range(0, len(paths), BATCH_SIZE):
                batch = []
                for p in paths[start : start + BATCH_SIZE]:
                    try:
                        batch.append(self._image_cls.open(p).convert("RGB"))
                    except Exception as exc:
                        raise InputParseError(f"cannot read image {p}: {exc}") from exc
                inputs = self._processor(images=batch, return_tensors="pt")
                feats = self._model.get_image_features(**inputs)
                chunks.append(feats.cpu().numpy())
        return np.concatenate(chunks).astype(np.float64)


_PROVIDERS = {
    "deterministic": DeterministicEncoder,
    "sentence-transformer": SentenceTransformerEncoder,
    "clip-text": ClipTextEncoder,
    "clip-image": ClipImageEncoder,
}


class EncoderPool:
    """Lazy, cached encoder instances; inference serialized per model."""

    def __init__(self):
        self._encoders: dict[str, object] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def get(self, entry: ModelRegistryEntry):
        with self._guard:
            if entry.model_id not in self._encoders:
                provider_type = entry.provider.get("type", "deterministic")
                cls = _PROVIDERS.get(provider_type)
                if cls is None:
                    raise ModelLoadError(f"unknown provider type {provider_type!r}")
                self._encoders[entry.model_id] = cls(entry)
                self._locks[entry.model_id] = threading.Lock()
            return self._encoders[entry.model_id], self._locks[entry.model_id]
