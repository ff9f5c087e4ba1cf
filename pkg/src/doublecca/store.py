"""Embedding matrices on disk, plus geometry helpers.

EMBX binary layout (little-endian throughout):

    bytes 0..3    magic "EMBX"
    bytes 4..7    version, u32 (currently 1)
    byte  8       dtype code, u8 (0 = float32, 1 = float64)
    bytes 9..11   reserved, zero
    bytes 12..19  rows, u64
    bytes 20..27  cols, u64
    bytes 28..    row-major values

A JSON manifest sits next to the file with the same basename and a ``.json``
suffix. Values load widened to float64 regardless of stored precision; the
numeric core never runs in 32-bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .errors import (
    AlignmentError,
    BadMagic,
    DtypeUnknown,
    NonFinite,
    ShapeMismatch,
    TruncatedFile,
    UnsupportedVersion,
    ZeroRow,
)
from .numerics import Matrix, as_matrix

MAGIC = b"EMBX"
VERSION = 1
_HEADER = struct.Struct("<4sIB3xQQ")
DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
DTYPE_CODES = {"f4": 0, "f8": 1}

ROLE_CLIP_TEXT = "clip-text"
ROLE_CLIP_IMAGE = "clip-image"
ROLE_SENTENCE = "sentence-encoder"
_EUCLIDEAN_ONLY_ROLES = {ROLE_CLIP_TEXT, ROLE_CLIP_IMAGE}


@dataclass
class EmbeddingManifest:
    model_id: str = "unknown"
    space: str = "euclidean"
    prompt_file: str | None = None
    seed: int | None = None
    normalized: bool = False
    count: int | None = None
    dim: int | None = None

    def __post_init__(self) -> None:
        if self.space not in ("euclidean", "hyperbolic"):
            raise ValueError(f"unknown space {self.space!r}")
        # Hyperbolic output only makes sense for a sentence-encoder role;
        # arbitrary model ids are left alone since the role is unknown.
        if self.space == "hyperbolic" and self.model_id in _EUCLIDEAN_ONLY_ROLES:
            raise ValueError(f"{self.model_id} embeddings cannot be hyperbolic")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class EmbeddingMatrix:
    matrix: Matrix
    manifest: EmbeddingManifest = field(default_factory=EmbeddingManifest)

    def __post_init__(self) -> None:
        self.matrix = as_matrix(self.matrix, "embedding matrix")
        if self.manifest.count is None:
            self.manifest.count = self.rows
        if self.manifest.dim is None:
            self.manifest.dim = self.cols
        if self.manifest.count != self.rows or self.manifest.dim != self.cols:
            raise AlignmentError(
                f"manifest says {self.manifest.count}x{self.manifest.dim}, "
                f"matrix is {self.rows}x{self.cols}"
            )

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def cols(self) -> int:
        return self.matrix.shape[1]


def manifest_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def write_embx(e: EmbeddingMatrix, path: str | Path, dtype: str = "f8") -> None:
    """Write matrix + manifest sidecar. dtype is "f4" or "f8"."""
    if dtype not in DTYPE_CODES:
        raise DtypeUnknown(f"dtype must be f4 or f8, got {dtype!r}")
    code = DTYPE_CODES[dtype]
    payload = np.ascontiguousarray(e.matrix, dtype=DTYPES[code]).tobytes()
    header = _HEADER.pack(MAGIC, VERSION, code, e.rows, e.cols)
    p = Path(path)
    with open(p, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    manifest_path(p).write_text(
        json.dumps(e.manifest.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_embx(path: str | Path) -> EmbeddingMatrix:
    p = Path(path)
    raw = p.read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{p} does not start with EMBX magic")
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"{p} shorter than the {_HEADER.size}-byte header")
    _, version, dtype_code, rows, cols = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise UnsupportedVersion(f"{p} has version {version}, expected {VERSION}")
    if dtype_code not in DTYPES:
        raise DtypeUnknown(f"{p} has dtype code {dtype_code}")
    dt = DTYPES[dtype_code]
    expected = rows * cols * dt.itemsize
    body = raw[_HEADER.size :]
    if len(body) != expected:
        raise TruncatedFile(f"{p} payload is {len(body)} bytes, expected {expected}")
    values = np.frombuffer(body, dtype=dt).reshape(rows, cols).astype(np.float64)

    mp = manifest_path(p)
    if mp.exists():
        fields = json.loads(mp.read_text(encoding="utf-8"))
        known = {k: fields[k] for k in EmbeddingManifest.__dataclass_fields__ if k in fields}
        manifest = EmbeddingManifest(**known)
    else:
        manifest = EmbeddingManifest()
    manifest.count = rows
    manifest.dim = cols
    return EmbeddingMatrix(matrix=values, manifest=manifest)


def l2_normalize_rows(m: Matrix) -> Matrix:
    a = as_matrix(m)
    norms = np.linalg.norm(a, axis=1)
    if np.any(norms == 0.0):
        raise ZeroRow(f"rows {np.flatnonzero(norms == 0.0).tolist()} have zero norm")
    return a / norms[:, None]


def poincare_log_map(m: Matrix, curvature_clamp: float = 1.0 - 1e-7) -> Matrix:
    """Map rows from the unit-curvature Poincare ball to its tangent space at
    the origin: x -> artanh(||x||) * x / ||x||. Norms are clamped below 1 so
    points on or outside the boundary stay finite; the origin maps to itself.
    """
    a = as_matrix(m)
    norms = np.linalg.norm(a, axis=1)
    clamped = np.minimum(norms, curvature_clamp)
    scale = np.ones_like(norms)
    nonzero = norms > 0.0
    scale[nonzero] = np.arctanh(clamped[nonzero]) / norms[nonzero]
    out = a * scale[:, None]
    if not np.all(np.isfinite(out)):
        raise NonFinite("log map produced non-finite values")
    return out


def ingest(
    e: EmbeddingMatrix,
    normalize: bool | None = None,
    log_map: bool | None = None,
) -> EmbeddingMatrix:
    """Apply the default ingestion transforms for an embedding's role.

    Hyperbolic sentence embeddings are log-mapped to Euclidean space first.
    CLIP-role embeddings are L2-normalized by default; sentence embeddings
    are not. Explicit flags override either default.
    """
    mat = e.matrix
    manifest = e.manifest
    space = manifest.space
    if log_map is None:
        log_map = space == "hyperbolic"
    if normalize is None:
        normalize = manifest.model_id in _EUCLIDEAN_ONLY_ROLES and not manifest.normalized
    if log_map:
        if space != "hyperbolic":
            raise ShapeMismatch("log map requested for a Euclidean embedding")
        mat = poincare_log_map(mat)
        space = "euclidean"
    if normalize:
        mat = l2_normalize_rows(mat)
    out_manifest = EmbeddingManifest(
        model_id=manifest.model_id,
        space=space,
        prompt_file=manifest.prompt_file,
        seed=manifest.seed,
        normalized=bool(normalize or manifest.normalized),
    )
    return EmbeddingMatrix(matrix=mat, manifest=out_manifest)
