"""EMBX writer/reader, independent implementation of the published layout:

    "EMBX" | version u32 LE (=1) | dtype u8 (0=f32, 1=f64) | 3 zero bytes |
    rows u64 LE | cols u64 LE | row-major values LE

plus a JSON manifest sidecar sharing the file's basename. Kept separate from
the consumer tool on purpose: the format is the contract, not the code.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMBX"
VERSION = 1
_HEADER = struct.Struct("<4sIB3xQQ")
_DTYPES = {"f4": (0, np.dtype("<f4")), "f8": (1, np.dtype("<f8"))}


class EmbxFormatError(Exception):
    pass


def manifest_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def write_embx(
    matrix: np.ndarray,
    path: str | Path,
    manifest: dict,
    dtype: str = "f4",
) -> None:
    if dtype not in _DTYPES:
        raise ValueError(f"dtype must be f4 or f8, got {dtype!r}")
    code, np_dtype = _DTYPES[dtype]
    mat = np.ascontiguousarray(matrix, dtype=np_dtype)
    if mat.ndim != 2:
        raise ValueError(f"matrix must be 2-D, got ndim={mat.ndim}")
    rows, cols = mat.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, code, rows, cols))
        fh.write(mat.tobytes())
    full = dict(manifest)
    full.setdefault("count", rows)
    full.setdefault("dim", cols)
    manifest_path(path).write_text(
        json.dumps(full, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_embx(path: str | Path) -> tuple[np.ndarray, dict]:
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise EmbxFormatError(f"{path}: bad magic")
    if len(raw) < _HEADER.size:
        raise EmbxFormatError(f"{path}: truncated header")
    _, version, code, rows, cols = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise EmbxFormatError(f"{path}: unsupported version {version}")
    np_dtype = {0: np.dtype("<f4"), 1: np.dtype("<f8")}.get(code)
    if np_dtype is None:
        raise EmbxFormatError(f"{path}: unknown dtype code {code}")
    body = raw[_HEADER.size :]
    if len(body) != rows * cols * np_dtype.itemsize:
        raise EmbxFormatError(f"{path}: truncated payload")
    values = np.frombuffer(body, dtype=np_dtype).reshape(rows, cols)
    mp = manifest_path(path)
    manifest = json.loads(mp.read_text(encoding="utf-8")) if mp.exists() else {}
    return values, manifest
