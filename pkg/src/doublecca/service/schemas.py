"""Request/response models for the fusion service.

Matrices never travel over the wire; requests carry file paths plus
parameters, responses carry small JSON (paths, digests, correlations,
metric reports). All paths resolve on the host running the service.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class PromptsRequest(BaseModel):
    classes: Optional[list[str]] = None
    classes_file: Optional[str] = None
    template: Literal["plain", "waffle_words", "waffle_chars"] = "waffle_chars"
    k: int = 500
    seed: int = 0
    wordlist_file: Optional[str] = None
    attributes: Optional[list[str]] = None  # expand classes x attributes first
    out: str


class PromptsResponse(BaseModel):
    path: str
    n_classes: int
    n_records: int
    rows_per_class: int
    digest: str


class EmbedFetchRequest(BaseModel):
    prompts_file: str
    model_id: str
    endpoint: Optional[str] = None  # falls back to DCCA_EMBED_ENDPOINT
    space: Literal["euclidean", "hyperbolic"] = "euclidean"
    select: Literal["originals", "randoms", "all"] = "all"
    normalize: Optional[bool] = None  # None = role default
    log_map: Optional[bool] = None    # None = map iff hyperbolic
    seed: Optional[int] = None
    out: str


class EmbedFetchResponse(BaseModel):
    path: str
    rows: int
    cols: int
    digest: str


class FuseRequest(BaseModel):
    prompts_file: str
    clip_class: str
    se_class: str
    clip_rand: str
    se_rand: str
    d_cca: int = 64
    k: Optional[int] = None  # None = infer from the prompts file
    seed: int = 0
    reg_eps: float = 1e-4
    center_mode: Literal["raw", "centered"] = "raw"
    first_cca_only: bool = False
    out: str


class FuseResponse(BaseModel):
    path: str
    n_classes: int
    dim: int
    correlations_first: list[float]
    correlations_second: list[float]
    digest: str
    provenance_path: str


class GroupReportModel(BaseModel):
    name: str
    acc: float
    count: int


class MetricsModel(BaseModel):
    avg: float
    worst: float
    gap: float
    groups: list[GroupReportModel]
    config_digest: Optional[str] = None


class EvalRequest(BaseModel):
    head: str
    images: str
    labels: str
    rows_per_class: int = 1
    aggregation: Literal["max", "mean"] = "max"
    out: Optional[str] = None


class EvalResponse(BaseModel):
    report: MetricsModel
    path: Optional[str] = None


class SynthRequest(BaseModel):
    out_dir: str
    seed: int = 1234
    n_classes: int = 2
    n_groups: int = 2
    d: int = 64
    d_se: int = 96
    spurious_strength: float = 0.7
    majority_fraction: float = 0.95
    m: int = 4000
    k: int = 500


class SynthResponse(BaseModel):
    images: str
    labels: str
    clip_class: str
    se_class: str
    clip_rand: str
    se_rand: str
    digest: str


class SweepRequest(BaseModel):
    out_dir: str
    k_values: list[int] = Field(default_factory=lambda: [10, 100, 500, 1000])
    d_cca_values: list[int] = Field(default_factory=lambda: [64])
    seed: int = 1234
    n_classes: int = 2
    n_groups: int = 2
    d: int = 64
    d_se: int = 96
    spurious_strength: float = 0.7
    majority_fraction: float = 0.95
    m: int = 4000
    reg_eps: float = 1e-4


class SweepRow(BaseModel):
    k: int
    d_cca: int
    avg: Optional[float] = None
    worst: Optional[float] = None
    gap: Optional[float] = None
    error: Optional[str] = None


class SweepResponse(BaseModel):
    csv_path: str
    rows: list[SweepRow]


class HealthResponse(BaseModel):
    status: str
    version: str
