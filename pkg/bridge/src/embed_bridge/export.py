"""Batch export of embeddings to EMBX files.

Text inputs come from a prompt JSONL (records carrying a "text" field, order
preserved) or a plain text file (one sentence per line). Image inputs come
from a directory, sorted by filename. The bridge never applies the
hyperbolic log map unless asked: geometry handling belongs to the consumer,
and the manifest records what was exported.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embx import write_embx
from .encoders import EncoderPool, InputParseError
from .registry import Registry

IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".bmp", ".webp"}


def read_texts(path: str | Path) -> list[str]:
    p = Path(path)
    lines = p.read_text(encoding="utf-8").splitlines()
    if p.suffix.lower() in (".jsonl", ".ndjson"):
        texts = []
        for ln, line in enumerate(lines):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                texts.append(rec["text"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise InputParseError(f"{p}:{ln + 1}: bad prompt record: {exc}") from exc
        return texts
    return [line for line in lines if line.strip()]


def list_images(images_dir: str | Path) -> list[Path]:
    root = Path(images_dir)
    if not root.is_dir():
        raise InputParseError(f"{images_dir} is not a directory")
    paths = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise InputParseError(f"{images_dir} contains no images")
    return paths


def _log_map(matrix: np.ndarray, clamp: float = 1.0 - 1e-7) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1)
    scale = np.ones_like(norms)
    nz = norms > 0
    scale[nz] = np.arctanh(np.minimum(norms[nz], clamp)) / norms[nz]
    return matrix * scale[:, None]


def export_embeddings(
    registry: Registry,
    model_id: str,
    out_path: str | Path,
    *,
    prompts_file: str | Path | None = None,
    images_dir: str | Path | None = None,
    pool: EncoderPool | None = None,
    dtype: str = "f4",
    apply_log_map: bool = False,
) -> dict:
    """Run one model over the inputs and write an EMBX file + manifest.

    Returns the manifest that was written.
    """
    entry = registry.get(model_id)
    if entry is None:
        raise KeyError(f"model {model_id!r} not in registry")
    if (prompts_file is None) == (images_dir is None):
        raise InputParseError("provide exactly one of prompts_file / images_dir")

    pool = pool or EncoderPool()
    encoder, lock = pool.get(entry)
    if images_dir is not None:
        if entry.role != "clip-image":
            raise InputParseError(f"model {model_id!r} has role {entry.role}, not clip-image")
        paths = list_images(images_dir)
        with lock:
            matrix = encoder.embed_images(paths)
    else:
        texts = read_texts(prompts_file)
        if not texts:
            raise InputParseError(f"{prompts_file} holds no sentences")
        with lock:
            matrix = encoder.embed_texts(texts)

    space = entry.space
    if apply_log_map:
        if space != "hyperbolic":
            raise InputParseError(f"model {model_id!r} output is not hyperbolic")
        matrix = _log_map(matrix)
        space = "euclidean"

    manifest = {
        "model_id": entry.model_id,
        "space": space,
        "prompt_file": str(prompts_file) if prompts_file else None,
        "seed": None,
        "normalized": False,
    }
    write_embx(matrix, out_path, manifest, dtype=dtype)
    manifest["count"], manifest["dim"] = matrix.shape
    return manifest
