"""Ratio measures over confusion counts, plus the PSME absolute error."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .classifiers import MarginConfig, classify_conventional, classify_margin
from .model import ConfusionCounts, ValidationError, canonicalize_points

MARGIN = "margin"
CONVENTIONAL = "conventional"


@dataclass(frozen=True)
class MeasureSet:
    """The six ratio measures; all in [0, 1] except mcc in [-1, 1]."""

    precision: float
    recall: float
    accuracy: float
    f1: float
    f1_class: float
    mcc: float

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "f1_class": self.f1_class,
            "mcc": self.mcc,
        }


@dataclass(frozen=True)
class PsmeConfig:
    """Penalty factor and the approach supplying PSME's fp/fn counts."""

    penalty: float = 100.0
    counting_source: str = MARGIN

    def __post_init__(self):
        if self.penalty < 0:
            raise ValidationError(f"penalty must be non-negative, got {self.penalty}")
        if self.counting_source not in (MARGIN, CONVENTIONAL):
            raise ValidationError(
                f"unknown counting source {self.counting_source!r}"
            )


def compute_measures(counts: ConfusionCounts) -> MeasureSet:
    """Evaluate all six ratio measures.

    Zero-denominator conventions: precision 0 when nothing was reported,
    recall 1 when there was nothing to find (tp + fn = 0), f1 0 when its
    denominator vanishes, mcc 0 when any factor of the radicand is zero.
    """
    tp, tn, fp, fn = counts.tp, counts.tn, counts.fp, counts.fn
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 1.0
    accuracy = (tp + tn) / (tp + tn + fp + fn) if tp + tn + fp + fn > 0 else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn > 0 else 0.0
    f1_class = (
        2 * (tp + tn) / (2 * (tp + tn) + fp + fn)
        if 2 * (tp + tn) + fp + fn > 0
        else 0.0
    )
    radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = (tp * tn - fp * fn) / math.sqrt(radicand) if radicand > 0 else 0.0
    return MeasureSet(
        precision=precision,
        recall=recall,
        accuracy=accuracy,
        f1=f1,
        f1_class=f1_class,
        mcc=mcc,
    )


def compute_psme(gt, alg, f_max: int, cfg: PsmeConfig | None = None,
                 margin_cfg: MarginConfig | None = None) -> float:
    """Penalized squared minimum error.

    penalty * (fp + fn) plus, for every algorithm point, the squared
    distance (in frames^2) to its nearest ground-truth point. The fp/fn
    pair comes from the configured counting source (margin by default).

    With an empty ground truth and a non-empty report the distance term is
    undefined and skipped; callers should flag such reports (see
    :func:`psme_min_term_defined`).
    """
    cfg = cfg or PsmeConfig()
    gt_pts = canonicalize_points(gt)
    alg_pts = canonicalize_points(alg)
    if cfg.counting_source == MARGIN:
        counts = classify_margin(gt_pts, alg_pts, f_max, margin_cfg)
    else:
        counts = classify_conventional(gt_pts, alg_pts, f_max)
    penalty_term = cfg.penalty * (counts.fp + counts.fn)
    if not gt_pts or not alg_pts:
        return penalty_term
    distance_term = sum(min((s - g) ** 2 for g in gt_pts) for s in alg_pts)
    return penalty_term + distance_term


def psme_min_term_defined(gt, alg) -> bool:
    """False when the nearest-point term had to be skipped (empty gt, points reported)."""
    return bool(len(tuple(gt))) or not len(tuple(alg))
