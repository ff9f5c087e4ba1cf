"""Synthetic spurious-correlation benchmark.

Generates a desk-scale grouped evaluation set plus a matching pair of
synthetic text-embedding families so the whole fusion pipeline can run and be
scored without any real encoder.

Geometry: orthonormal class directions v_y and context (group) directions g_a
live in the image space. An image for (label y, context a) is the unit vector
along v_y + spurious_strength * g_a + noise. The synthetic vision-language
text encoder leaks context into class prompts (t_y picks up g_{a(y)} with
weight text_spurious), which is what makes the plain prompt-embedding head
fragile on minority groups. The synthetic sentence encoder sees the same
sentences but lives in its own space with no context leak in the class
embeddings. Random sentences drift in context and in a shared latent
direction identically across the two encoders (same sentence, same
semantics), with encoder-private jitter on top.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import DimensionTooSmall, ShapeMismatch
from .evaluation import GroupedEvalSet
from .numerics import Matrix
from .store import (
    EmbeddingManifest,
    EmbeddingMatrix,
    ROLE_CLIP_IMAGE,
    ROLE_CLIP_TEXT,
    ROLE_SENTENCE,
    l2_normalize_rows,
)

IMAGE_NOISE_SIGMA = 0.1


def _orthonormal_columns(rng: np.random.Generator, dim: int, count: int) -> Matrix:
    q, r = np.linalg.qr(rng.standard_normal((dim, count)))
    # Fix the QR sign ambiguity so the directions are reproducible.
    return q * np.sign(np.diag(r))


def synth_generate(
    n_classes: int,
    n_groups: int,
    d: int,
    spurious_strength: float,
    majority_fraction: float,
    m: int,
    seed: int,
) -> tuple[GroupedEvalSet, Matrix, Matrix]:
    """Draw a grouped evaluation set; returns (eval_set, class_dirs, group_dirs).

    Each sample's context matches its label-linked majority context with
    probability majority_fraction. Report groups are the (label x context)
    cross product, so minority cells empty out at majority_fraction = 1.
    """
    if n_classes < 2 or n_groups < 1:
        raise ShapeMismatch("need n_classes >= 2 and n_groups >= 1")
    if d < n_classes + n_groups:
        raise DimensionTooSmall(f"d={d} < n_classes + n_groups = {n_classes + n_groups}")
    if not (0.0 <= spurious_strength <= 1.0):
        raise ValueError("spurious_strength must be in [0, 1]")
    if not (0.5 < majority_fraction <= 1.0):
        raise ValueError("majority_fraction must be in (0.5, 1]")
    if m < 10 * n_classes * n_groups:
        raise ShapeMismatch(f"m={m} below 10 per (class, context) cell")

    rng = np.random.default_rng([seed, 0])
    dirs = _orthonormal_columns(rng, d, n_classes + n_groups)
    class_dirs = dirs[:, :n_classes].T.copy()
    group_dirs = dirs[:, n_classes:].T.copy()

    labels = rng.integers(0, n_classes, size=m)
    majority = labels % n_groups
    flip = rng.random(m) >= majority_fraction
    offset = rng.integers(1, max(n_groups, 2), size=m)
    attrs = np.where(flip & (n_groups > 1), (majority + offset) % n_groups, majority)

    images = (
        class_dirs[labels]
        + spurious_strength * group_dirs[attrs]
        + IMAGE_NOISE_SIGMA * rng.standard_normal((m, d))
    )
    images = l2_normalize_rows(images)

    groups = labels * n_groups + attrs
    group_names = [f"class{y}|ctx{a}" for y in range(n_classes) for a in range(n_groups)]
    eval_set = GroupedEvalSet(
        images=EmbeddingMatrix(
            matrix=images,
            manifest=EmbeddingManifest(model_id=ROLE_CLIP_IMAGE, seed=seed, normalized=True),
        ),
        labels=labels,
        groups=groups,
        group_names=group_names,
    )
    return eval_set, class_dirs, group_dirs


@dataclass(frozen=True)
class TextViewConfig:
    """Knobs for the synthetic encoder pair (fixture constants, tuned once)."""

    d_se: int = 96
    text_spurious: float = 1.3      # context leak in class prompt embeddings
    context_drift_clip: float = 0.9  # per-sentence wander along context dirs
    context_drift_se: float = 0.6
    shared_dim: int = 24            # latent jitter both encoders see
    shared_scale_clip: float = 0.35
    shared_scale_se: float = 0.35
    private_clip: float = 0.1
    private_se: float = 0.1
    class_jitter: float = 0.02

    def to_json(self) -> dict:
        return asdict(self)


def synth_text_views(
    class_dirs: Matrix,
    group_dirs: Matrix,
    k: int,
    seed: int,
    cfg: TextViewConfig = TextViewConfig(),
) -> tuple[EmbeddingMatrix, EmbeddingMatrix, EmbeddingMatrix, EmbeddingMatrix]:
    """Build (clip_classes, se_classes, clip_random, se_random) matrices.

    Rows follow prompt-set order: class matrices one row per class, random
    matrices class-major with k rows per class. The clip-side rows come out
    L2-normalized (ingestion convention); sentence-side rows stay raw.
    """
    n, d = class_dirs.shape
    n_groups = group_dirs.shape[0]
    if group_dirs.shape[1] != d:
        raise ShapeMismatch("class and context directions must share a dimension")
    if cfg.d_se < n + n_groups + 1:
        raise DimensionTooSmall(f"d_se={cfg.d_se} too small for {n + n_groups} directions")

    rng = np.random.default_rng([seed, 1])
    se_dirs = _orthonormal_columns(rng, cfg.d_se, n + n_groups)
    se_class_dirs = se_dirs[:, :n].T
    se_context_dirs = se_dirs[:, n:].T
    shared_map_clip = _orthonormal_columns(rng, d, min(cfg.shared_dim, d))
    shared_map_se = _orthonormal_columns(rng, cfg.d_se, min(cfg.shared_dim, cfg.d_se))

    majority = np.arange(n) % n_groups
    clip_class = (
        class_dirs
        + cfg.text_spurious * group_dirs[majority]
        + cfg.class_jitter * rng.standard_normal((n, d))
    )
    clip_class = l2_normalize_rows(clip_class)
    se_class = se_class_dirs + cfg.class_jitter * rng.standard_normal((n, cfg.d_se))

    kn = k * n
    labels = np.repeat(np.arange(n), k)
    context_mix = rng.standard_normal((kn, n_groups))       # same sentence, same drift
    shared = rng.standard_normal((kn, shared_map_clip.shape[1]))

    clip_random = (
        class_dirs[labels]
        + cfg.text_spurious * group_dirs[majority[labels]]
        + cfg.context_drift_clip * (context_mix @ group_dirs)
        + cfg.shared_scale_clip * (shared @ shared_map_clip.T)
        + cfg.private_clip * rng.standard_normal((kn, d))
    )
    clip_random = l2_normalize_rows(clip_random)
    se_random = (
        se_class_dirs[labels]
        + cfg.context_drift_se * (context_mix @ se_context_dirs)
        + cfg.shared_scale_se * (shared @ shared_map_se.T)
        + cfg.private_se * rng.standard_normal((kn, cfg.d_se))
    )

    def wrap(mat: Matrix, role: str, normalized: bool) -> EmbeddingMatrix:
        return EmbeddingMatrix(
            matrix=mat,
            manifest=EmbeddingManifest(model_id=role, seed=seed, normalized=normalized),
        )

    return (
        wrap(clip_class, ROLE_CLIP_TEXT, True),
        wrap(se_class, ROLE_SENTENCE, False),
        wrap(clip_random, ROLE_CLIP_TEXT, True),
        wrap(se_random, ROLE_SENTENCE, False),
    )


@dataclass(frozen=True)
class SynthSpec:
    """Full description of one synthetic benchmark instance."""

    n_classes: int = 2
    n_groups: int = 2
    d: int = 64
    spurious_strength: float = 0.7
    majority_fraction: float = 0.95
    m: int = 4000
    k: int = 500
    seed: int = 1234
    text: TextViewConfig = TextViewConfig()

    def to_json(self) -> dict:
        out = asdict(self)
        return out


def build_instance(spec: SynthSpec):
    """Generate the eval set, direction vectors, and all four text matrices."""
    eval_set, class_dirs, group_dirs = synth_generate(
        spec.n_classes,
        spec.n_groups,
        spec.d,
        spec.spurious_strength,
        spec.majority_fraction,
        spec.m,
        spec.seed,
    )
    views = synth_text_views(class_dirs, group_dirs, spec.k, spec.seed, spec.text)
    return eval_set, class_dirs, group_dirs, views
