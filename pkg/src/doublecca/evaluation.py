"""Zero-shot classification and group-robustness metrics.

A weight matrix W (n classes x d) classifies an image embedding f by argmax
over W @ f, ties broken toward the lower class index. Metrics are reported
in percent: sample-weighted average accuracy, per-group accuracy, worst-group
accuracy, and the gap (average minus worst). Groups with zero samples are
omitted from the report rather than counted as 0%.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyGroup, ShapeMismatch
from .numerics import Matrix, as_matrix
from .store import EmbeddingMatrix


@dataclass
class GroupedEvalSet:
    images: EmbeddingMatrix
    labels: np.ndarray
    groups: np.ndarray
    group_names: list[str]

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.groups = np.asarray(self.groups, dtype=np.int64)
        m = self.images.rows
        if m < 1:
            raise ShapeMismatch("evaluation set needs at least one sample")
        if self.labels.shape != (m,) or self.groups.shape != (m,):
            raise ShapeMismatch(
                f"labels/groups must have {m} entries, got {self.labels.shape}/{self.groups.shape}"
            )
        if self.labels.min() < 0:
            raise ShapeMismatch("labels must be nonnegative")
        if self.groups.min() < 0 or self.groups.max() >= len(self.group_names):
            raise ShapeMismatch(
                f"group indices must fall in [0, {len(self.group_names)}), "
                f"got max {self.groups.max()}"
            )

    @property
    def n_samples(self) -> int:
        return self.images.rows


@dataclass(frozen=True)
class GroupAccuracy:
    name: str
    acc: float
    count: int


@dataclass(frozen=True)
class MetricsReport:
    avg_acc: float
    per_group: tuple[GroupAccuracy, ...]
    worst_acc: float
    gap: float
    config_digest: str | None = None

    def to_json(self) -> dict:
        return {
            "avg": self.avg_acc,
            "worst": self.worst_acc,
            "gap": self.gap,
            "groups": [{"name": g.name, "acc": g.acc, "count": g.count} for g in self.per_group],
            "config_digest": self.config_digest,
        }


@dataclass(frozen=True)
class AttributeSpec:
    attribute_values: tuple[str, ...]
    aggregation: str = "max"

    def __post_init__(self) -> None:
        if len(self.attribute_values) < 1:
            raise ValueError("need at least one attribute value")
        if self.aggregation not in ("max", "mean"):
            raise ValueError(f"aggregation must be max or mean, got {self.aggregation!r}")


def class_scores(w: Matrix, images: Matrix) -> Matrix:
    wm = as_matrix(w, "w")
    im = as_matrix(images, "images")
    if im.shape[1] != wm.shape[1]:
        raise ShapeMismatch(f"weights expect dim {wm.shape[1]}, images have {im.shape[1]}")
    return im @ wm.T


def classify(w: Matrix, f_v: np.ndarray) -> int:
    """Predicted class for a single image embedding."""
    v = np.asarray(f_v, dtype=np.float64).reshape(1, -1)
    return int(np.argmax(class_scores(w, v), axis=1)[0])


def classify_batch(w: Matrix, images: Matrix) -> np.ndarray:
    # np.argmax already breaks ties toward the lowest index.
    return np.argmax(class_scores(w, images), axis=1)


def reduce_expanded_scores(scores: Matrix, rows_per_class: int, aggregation: str) -> Matrix:
    """Collapse scores over expanded (class x attribute) rows to class scores."""
    m, total = scores.shape
    if rows_per_class < 1 or total % rows_per_class != 0:
        raise ShapeMismatch(
            f"{total} score columns do not divide into groups of {rows_per_class}"
        )
    n = total // rows_per_class
    stacked = scores.reshape(m, n, rows_per_class)
    if aggregation == "max":
        return stacked.max(axis=2)
    if aggregation == "mean":
        return stacked.mean(axis=2)
    raise ValueError(f"aggregation must be max or mean, got {aggregation!r}")


def evaluate(
    w: Matrix,
    eval_set: GroupedEvalSet,
    *,
    rows_per_class: int = 1,
    aggregation: str = "max",
    config_digest: str | None = None,
) -> MetricsReport:
    """Score the evaluation set and compute group metrics.

    When the head was built over attribute-expanded prompts, rows_per_class
    tells how many consecutive weight rows belong to each class; their scores
    are reduced by the aggregation rule before the argmax.
    """
    scores = class_scores(w, eval_set.images.matrix)
    if rows_per_class > 1:
        scores = reduce_expanded_scores(scores, rows_per_class, aggregation)
    preds = np.argmax(scores, axis=1)
    correct = preds == eval_set.labels

    per_group: list[GroupAccuracy] = []
    for gi, name in enumerate(eval_set.group_names):
        mask = eval_set.groups == gi
        count = int(mask.sum())
        if count == 0:
            continue  # declared but empty: absent from the report
        per_group.append(GroupAccuracy(name=name, acc=100.0 * correct[mask].mean(), count=count))
    if not per_group:
        raise EmptyGroup("no group has any samples")

    avg = 100.0 * correct.mean()
    worst = min(g.acc for g in per_group)
    return MetricsReport(
        avg_acc=avg,
        per_group=tuple(per_group),
        worst_acc=worst,
        gap=avg - worst,
        config_digest=config_digest,
    )


def expand_with_attributes(
    class_names: Sequence[str], attr: AttributeSpec
) -> tuple[list[str], np.ndarray]:
    """Cross class names with attribute phrases, class-major order.

    Returns the expanded prompt seeds ("<class> <attribute>") and a map from
    expanded row index to class index.
    """
    expanded: list[str] = []
    row_to_class: list[int] = []
    for ci, name in enumerate(class_names):
        for a in attr.attribute_values:
            expanded.append(f"{name} {a}")
            row_to_class.append(ci)
    return expanded, np.asarray(row_to_class, dtype=np.int64)


def cross_group_indices(
    labels: np.ndarray, attributes: np.ndarray, attribute_names: Sequence[str], class_names: Sequence[str]
) -> tuple[np.ndarray, list[str]]:
    """Combine labels and a raw attribute vector into (label x attribute)
    group indices, the usual convention for spurious-correlation benchmarks."""
    labels = np.asarray(labels, dtype=np.int64)
    attributes = np.asarray(attributes, dtype=np.int64)
    n_attr = len(attribute_names)
    groups = labels * n_attr + attributes
    names = [f"{c}|{a}" for c in class_names for a in attribute_names]
    return groups, names


# -- label / report files -------------------------------------------------------

def load_labels(path: str | Path) -> tuple[np.ndarray, np.ndarray, list[str] | None]:
    """Read labels and groups from JSON ({"labels", "groups", "group_names"})
    or CSV with header index,label,group."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        with open(p, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["index", "label", "group"]:
                raise ValueError(f"{p} must have header index,label,group")
            rows = sorted((int(r["index"]), int(r["label"]), int(r["group"])) for r in reader)
        labels = np.asarray([r[1] for r in rows], dtype=np.int64)
        groups = np.asarray([r[2] for r in rows], dtype=np.int64)
        return labels, groups, None
    data = json.loads(p.read_text(encoding="utf-8"))
    labels = np.asarray(data["labels"], dtype=np.int64)
    groups = np.asarray(data["groups"], dtype=np.int64)
    names = data.get("group_names")
    return labels, groups, names


def save_labels(
    path: str | Path, labels: np.ndarray, groups: np.ndarray, group_names: Sequence[str]
) -> None:
    payload = {
        "labels": np.asarray(labels).astype(int).tolist(),
        "groups": np.asarray(groups).astype(int).tolist(),
        "group_names": list(group_names),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def save_metrics(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
