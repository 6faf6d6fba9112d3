"""Confident-learning label-fault detection.

Fixed variant: per-class thresholds are the mean self-probability of each
class; a row is confidently assigned the highest-probability class among
those meeting their threshold (ties to the lowest class index); rows whose
given label differs from their confident class are the label-fault
candidates. No calibration of the joint, no probabilistic ranking.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


def _as_labels(labels, n_classes: int) -> np.ndarray:
    arr = np.asarray(labels, dtype=np.int64)
    if arr.ndim != 1:
        raise ValidationError("labels must be a 1-d sequence of class indices")
    if arr.size == 0:
        raise ValidationError("labels must be non-empty")
    if arr.min() < 0 or arr.max() >= n_classes:
        raise ValidationError(
            f"labels must lie in [0, {n_classes}); got range"
            f" [{int(arr.min())}, {int(arr.max())}]"
        )
    return arr


def _as_probs(probs) -> np.ndarray:
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValidationError("probabilities must be an n x K matrix with K >= 2")
    return arr


def class_thresholds(labels, probs) -> np.ndarray:
    """t[j] = mean predicted probability of class j over rows labeled j."""
    probs = _as_probs(probs)
    labels = _as_labels(labels, probs.shape[1])
    if labels.shape[0] != probs.shape[0]:
        raise ValidationError("labels and probabilities disagree on row count")
    k = probs.shape[1]
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        missing = int(np.argmin(counts))
        raise ValidationError(f"class {missing} has zero labeled rows")
    sums = np.zeros(k, dtype=np.float64)
    np.add.at(sums, labels, probs[np.arange(len(labels)), labels])
    return sums / counts


@dataclass
class ConfidentJoint:
    """K x K counts of (given label, confident class) plus per-row assignment."""

    counts: np.ndarray
    thresholds: np.ndarray
    confident_class: np.ndarray  # per row; -1 when no class met its threshold

    @property
    def n_uncounted(self) -> int:
        return int(np.sum(self.confident_class < 0))


def compute_confident_joint(labels, probs) -> ConfidentJoint:
    """Count each row into C[given][confident]; rows with no confident class skip."""
    probs = _as_probs(probs)
    labels = _as_labels(labels, probs.shape[1])
    thresholds = class_thresholds(labels, probs)
    k = probs.shape[1]
    above = probs >= thresholds[np.newaxis, :]
    masked = np.where(above, probs, -np.inf)
    best = np.argmax(masked, axis=1)  # first maximum = lowest class index on ties
    has_confident = above.any(axis=1)
    confident = np.where(has_confident, best, -1).astype(np.int64)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (labels[has_confident], best[has_confident]), 1)
    return ConfidentJoint(counts=counts, thresholds=thresholds, confident_class=confident)


@dataclass(frozen=True)
class LabelIssue:
    index: int
    given_label: int
    suggested_label: int
    confidence: float


@dataclass
class LabelIssueReport:
    """Label-fault candidates, most confident first."""

    issues: list[LabelIssue] = field(default_factory=list)

    @property
    def indices(self) -> list[int]:
        return sorted(issue.index for issue in self.issues)

    def __len__(self) -> int:
        return len(self.issues)


def find_label_issues(labels, probs) -> LabelIssueReport:
    """Rows counted off-diagonal in the confident joint, ordered by confidence."""
    probs = _as_probs(probs)
    labels = _as_labels(labels, probs.shape[1])
    joint = compute_confident_joint(labels, probs)
    rows = np.nonzero(
        (joint.confident_class >= 0) & (joint.confident_class != labels)
    )[0]
    issues = [
        LabelIssue(
            index=int(r),
            given_label=int(labels[r]),
            suggested_label=int(joint.confident_class[r]),
            confidence=float(probs[r, joint.confident_class[r]]),
        )
        for r in rows
    ]
    issues.sort(key=lambda issue: (-issue.confidence, issue.index))
    return LabelIssueReport(issues=issues)
