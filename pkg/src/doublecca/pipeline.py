"""The two-stage fusion pipeline.

Stage one fits a CCA between the two families of random-sentence embeddings
(the vision-language text encoder on side A, the sentence encoder on side B)
and turns each family's per-class embeddings into a linear classifier head in
the image-embedding space:

    text_head     = X    @ W_a @ W_a.T      (n x d)
    sentence_head = X_se @ W_b @ W_a.T      (n x d)

Stage two treats the random-sentence embeddings as stand-ins for image
embeddings, scores them with both heads, fits a second CCA between the two
score matrices, and merges the heads through the resulting alignment:

    merge   = (P_b @ P_a^-1).T              (n x n)
    weights = (text_head + merge @ sentence_head) / 2

The merged weights classify an image embedding f by argmax over weights @ f.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any

import numpy as np

from .cca import CcaConfig, CcaTransform, fit_cca
from .errors import AlignmentError, ShapeMismatch, SingularPA
from .numerics import Matrix, as_matrix
from .prompts import PromptFile, PromptSet
from .store import EmbeddingMatrix

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class PipelineConfig:
    d_cca: int = 64          # common-space dimension of the first CCA
    k: int = 500             # random sentences per class
    seed: int = 0
    reg_eps: float = 1e-4
    center_mode: str = "raw"  # "raw" or "centered" class matrices for the heads
    first_cca_only: bool = False
    eig_floor: float = 1e-10

    def __post_init__(self) -> None:
        if self.d_cca < 1:
            raise ValueError("d_cca must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.center_mode not in ("raw", "centered"):
            raise ValueError(f"center_mode must be raw or centered, got {self.center_mode!r}")

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StageOneResult:
    transform: CcaTransform
    text_head: Matrix       # n x d, from the vision-language text embeddings
    sentence_head: Matrix   # n x d, sentence embeddings mapped into the same space

    @property
    def n_classes(self) -> int:
        return self.text_head.shape[0]

    @property
    def image_dim(self) -> int:
        return self.text_head.shape[1]


@dataclass(frozen=True)
class FusedHead:
    weights: Matrix           # n x d merged classifier
    merge: Matrix             # n x n alignment applied to the sentence head
    proj_a: Matrix
    proj_b: Matrix
    provenance: dict[str, Any] = field(repr=False)


def first_stage(
    clip_classes: EmbeddingMatrix,
    se_classes: EmbeddingMatrix,
    clip_random: EmbeddingMatrix,
    se_random: EmbeddingMatrix,
    config: PipelineConfig,
) -> StageOneResult:
    """Fit the first CCA on random-sentence pairs and build both heads."""
    n = clip_classes.rows
    if se_classes.rows != n:
        raise AlignmentError(
            f"class matrices disagree: {n} vs {se_classes.rows} rows"
        )
    if clip_random.rows != se_random.rows:
        raise AlignmentError(
            f"random-sentence matrices disagree: {clip_random.rows} vs {se_random.rows} rows"
        )
    if clip_random.rows != config.k * n:
        raise AlignmentError(
            f"expected k*n = {config.k}*{n} = {config.k * n} random-sentence rows, "
            f"got {clip_random.rows}"
        )
    if clip_random.cols != clip_classes.cols:
        raise ShapeMismatch(
            f"text-encoder dims disagree: classes {clip_classes.cols}, randoms {clip_random.cols}"
        )
    if se_random.cols != se_classes.cols:
        raise ShapeMismatch(
            f"sentence-encoder dims disagree: classes {se_classes.cols}, randoms {se_random.cols}"
        )

    fit = fit_cca(
        clip_random.matrix,
        se_random.matrix,
        CcaConfig(out_dim=config.d_cca, reg_eps=config.reg_eps, eig_floor=config.eig_floor),
    )

    x = clip_classes.matrix
    x_se = se_classes.matrix
    if config.center_mode == "centered":
        x = x - fit.mean_a
        x_se = x_se - fit.mean_b

    back = fit.w_a.T  # both heads land in the image-embedding space via side A
    return StageOneResult(
        transform=fit,
        text_head=x @ fit.w_a @ back,
        sentence_head=x_se @ fit.w_b @ back,
    )


def simulate_logits(s1: StageOneResult, f_r: Matrix) -> tuple[Matrix, Matrix]:
    """Score every random sentence with both heads (rows are samples)."""
    f = as_matrix(f_r, "f_r")
    if f.shape[1] != s1.image_dim:
        raise ShapeMismatch(f"f_r has {f.shape[1]} columns, heads expect {s1.image_dim}")
    return f @ s1.text_head.T, f @ s1.sentence_head.T


def second_stage(
    x_a: Matrix,
    x_b: Matrix,
    s1: StageOneResult,
    config: PipelineConfig,
    provenance: dict[str, Any] | None = None,
) -> FusedHead:
    """Fit the second CCA on simulated scores and merge the two heads."""
    n = s1.n_classes
    a = as_matrix(x_a, "x_a")
    b = as_matrix(x_b, "x_b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"score matrices disagree: {a.shape} vs {b.shape}")
    if a.shape[1] != n:
        raise ShapeMismatch(f"score matrices have {a.shape[1]} columns, expected {n}")

    prov = dict(provenance or {})
    prov["config"] = config.to_json()
    prov["correlations_first"] = s1.transform.correlations.tolist()

    if config.first_cca_only:
        eye = np.eye(n)
        prov["correlations_second"] = []
        return FusedHead(
            weights=s1.text_head.copy(),
            merge=eye,
            proj_a=eye.copy(),
            proj_b=eye.copy(),
            provenance=prov,
        )

    fit2 = fit_cca(
        a, b, CcaConfig(out_dim=n, reg_eps=config.reg_eps, eig_floor=config.eig_floor)
    )
    p_a, p_b = fit2.w_a, fit2.w_b
    cond = float(np.linalg.cond(p_a))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularPA(
            f"first-view projection condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; "
            "raise reg_eps or add random sentences"
        )
    merge = (p_b @ np.linalg.inv(p_a)).T
    weights = 0.5 * (s1.text_head + merge @ s1.sentence_head)

    prov["correlations_second"] = fit2.correlations.tolist()
    return FusedHead(weights=weights, merge=merge, proj_a=p_a, proj_b=p_b, provenance=prov)


def _check_prompt_alignment(
    prompt_set: PromptSet | PromptFile,
    clip_classes: EmbeddingMatrix,
    se_classes: EmbeddingMatrix,
    clip_random: EmbeddingMatrix,
    se_random: EmbeddingMatrix,
    config: PipelineConfig,
) -> None:
    n = prompt_set.n_classes
    kn = len(prompt_set.randoms)
    if clip_classes.rows != n or se_classes.rows != n:
        raise AlignmentError(
            f"class embeddings have {clip_classes.rows}/{se_classes.rows} rows, "
            f"prompt set has {n} classes"
        )
    if clip_random.rows != kn or se_random.rows != kn:
        raise AlignmentError(
            f"random embeddings have {clip_random.rows}/{se_random.rows} rows, "
            f"prompt set has {kn} random sentences"
        )
    if config.k * n != kn:
        raise AlignmentError(f"config.k={config.k} with {n} classes expects {config.k * n} rows, prompt set has {kn}")
    expected_seed = getattr(prompt_set, "seed", None)
    if expected_seed is not None:
        for emb in (clip_classes, se_classes, clip_random, se_random):
            got = emb.manifest.seed
            if got is not None and got != expected_seed:
                raise AlignmentError(
                    f"embedding manifest seed {got} != prompt set seed {expected_seed}"
                )


def run_doublecca(
    prompt_set: PromptSet | PromptFile,
    clip_classes: EmbeddingMatrix,
    se_classes: EmbeddingMatrix,
    clip_random: EmbeddingMatrix,
    se_random: EmbeddingMatrix,
    config: PipelineConfig,
    provenance: dict[str, Any] | None = None,
) -> FusedHead:
    """End-to-end fusion: first stage, simulated scores, second stage."""
    _check_prompt_alignment(prompt_set, clip_classes, se_classes, clip_random, se_random, config)
    s1 = first_stage(clip_classes, se_classes, clip_random, se_random, config)
    x_a, x_b = simulate_logits(s1, clip_random.matrix)
    prov = dict(provenance or {})
    prov.setdefault("inputs", {})
    for label, emb in (
        ("clip_classes", clip_classes),
        ("se_classes", se_classes),
        ("clip_random", clip_random),
        ("se_random", se_random),
    ):
        prov["inputs"].setdefault(label, emb.manifest.to_json())
    return second_stage(x_a, x_b, s1, config, provenance=prov)
