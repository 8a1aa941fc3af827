"""Evaluation orchestration: granularity cascade, per-recording scoring,
dataset aggregation, static cross-validation folds, and report assembly."""

from __future__ import annotations

import csv
import datetime as _dt
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__ as TOOLKIT_VERSION
from .classifiers import (
    DIRAC,
    GAUSSIAN,
    KernelConfig,
    MarginConfig,
    classify_conventional,
    classify_ink,
    classify_margin,
)
from .measures import (
    CONVENTIONAL,
    MARGIN,
    MeasureSet,
    PsmeConfig,
    compute_measures,
    compute_psme,
    psme_min_term_defined,
)
from .model import (
    GRANULARITIES,
    ConfusionCounts,
    Granularity,
    GroundTruth,
    Recording,
    SegmentationResult,
    ValidationError,
    load_ground_truth,
    load_recording,
    time_ms_to_frames,
)

REPORT_SCHEMA_VERSION = "1"
APPROACHES = ("conventional", "margin", "ink")
FOLD_COUNT = 5

CSV_COLUMNS = (
    "recording", "granularity", "approach",
    "tp", "tn", "fp", "fn",
    "precision", "recall", "accuracy", "f1", "f1_class", "mcc",
    "psme",
)


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation parameters; time values in milliseconds, converted to
    frames with the recording's frame rate at evaluation time."""

    margin_ms: float = 200.0
    sigma_ms: float = 66.67
    psme_penalty: float = 100.0
    kernel: str = GAUSSIAN
    quadrature_step_frames: float | None = None  # None: sigma/100
    psme_source: str = MARGIN
    strict_margin: bool = False

    def __post_init__(self):
        if self.margin_ms <= 0:
            raise ValidationError(f"margin_ms must be positive, got {self.margin_ms}")
        if self.sigma_ms <= 0:
            raise ValidationError(f"sigma_ms must be positive, got {self.sigma_ms}")
        if self.kernel not in (GAUSSIAN, DIRAC):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.psme_penalty < 0:
            raise ValidationError("psme_penalty must be non-negative")
        if self.psme_source not in (MARGIN, CONVENTIONAL):
            raise ValidationError(f"unknown psme source {self.psme_source!r}")

    def margin_config(self, frame_rate_hz: float) -> MarginConfig:
        return MarginConfig(
            margin=time_ms_to_frames(self.margin_ms, frame_rate_hz),
            strict=self.strict_margin,
        )

    def kernel_config(self, frame_rate_hz: float) -> KernelConfig:
        sigma = time_ms_to_frames(self.sigma_ms, frame_rate_hz)
        return KernelConfig(
            sigma=sigma,
            kernel=self.kernel,
            quadrature_step=self.quadrature_step_frames,
        )

    def psme_config(self) -> PsmeConfig:
        return PsmeConfig(penalty=self.psme_penalty, counting_source=self.psme_source)

    def as_dict(self, frame_rate_hz: float) -> dict:
        kcfg = self.kernel_config(frame_rate_hz)
        return {
            "margin_ms": self.margin_ms,
            "sigma_ms": self.sigma_ms,
            "psme_penalty": self.psme_penalty,
            "psme_source": self.psme_source,
            "kernel": self.kernel,
            "quadrature_step_frames": kcfg.quadrature_step,
            "strict_margin": self.strict_margin,
            "margin_frames": time_ms_to_frames(self.margin_ms, frame_rate_hz),
            "sigma_frames": kcfg.sigma,
            "psme_distance_unit": "frames^2",
        }


@dataclass(frozen=True)
class Provenance:
    """Reproducibility metadata echoed into every report."""

    dataset_version: str = "unversioned"
    algorithm: str = "external"
    algorithm_params: dict = field(default_factory=dict)
    data_access: str = "full"  # "full" or "frame_by_frame"
    training_api_used: bool = False
    timestamp: str = ""  # ISO-8601; excluded from determinism comparisons

    def stamped(self) -> "Provenance":
        now = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        return replace(self, timestamp=now)

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "algorithm_params": dict(self.algorithm_params),
            "data_access": self.data_access,
            "training_api_used": self.training_api_used,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class GranularityCascade:
    """Cumulative point sets: rough within medium within fine."""

    rough: tuple[float, ...]
    medium: tuple[float, ...]
    fine: tuple[float, ...]

    def level(self, granularity: Granularity) -> tuple[float, ...]:
        return getattr(self, granularity.value)


def cascade(gt: GroundTruth) -> GranularityCascade:
    """Build the cumulative evaluation sets from tagged points."""
    rough = tuple(sorted(t for t, g in gt.points if g == Granularity.ROUGH))
    medium = tuple(sorted(t for t, g in gt.points if g <= Granularity.MEDIUM))
    fine = tuple(sorted(t for t, g in gt.points))
    return GranularityCascade(rough=rough, medium=medium, fine=fine)


@dataclass(frozen=True)
class Cell:
    counts: ConfusionCounts
    measures: MeasureSet

    def as_dict(self) -> dict:
        return {"counts": self.counts.as_dict(), "measures": self.measures.as_dict()}


@dataclass(frozen=True)
class EvaluationReport:
    """Scores for one recording: 3 granularities x 3 approaches plus PSME."""

    recording: str
    f_max: int
    frame_rate_hz: float
    config: dict
    provenance: Provenance
    dataset_version: str
    cells: dict  # granularity value -> approach -> Cell
    psme: dict  # granularity value -> float
    psme_defined: dict  # granularity value -> bool

    def cell(self, granularity: Granularity, approach: str) -> Cell:
        return self.cells[granularity.value][approach]

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "toolkit_version": TOOLKIT_VERSION,
            "dataset_version": self.dataset_version,
            "recording": self.recording,
            "f_max": self.f_max,
            "frame_rate_hz": self.frame_rate_hz,
            "config": self.config,
            "provenance": self.provenance.as_dict(),
            "cells": {
                g: {a: cell.as_dict() for a, cell in by_approach.items()}
                for g, by_approach in self.cells.items()
            },
            "psme": dict(self.psme),
            "psme_defined": dict(self.psme_defined),
        }

    def to_csv_rows(self) -> list[dict]:
        rows = []
        for g in GRANULARITIES:
            for approach in APPROACHES:
                cell = self.cell(g, approach)
                row = {
                    "recording": self.recording,
                    "granularity": g.value,
                    "approach": approach,
                    **cell.counts.as_dict(),
                    **cell.measures.as_dict(),
                    "psme": self.psme[g.value],
                }
                row.pop("f_max")
                rows.append(row)
        return rows


def evaluate_points(gt_points, alg_points, f_max: int, frame_rate_hz: float,
                    cfg: EvalConfig) -> dict:
    """Score one point set against one ground-truth set, all approaches."""
    margin_cfg = cfg.margin_config(frame_rate_hz)
    kernel_cfg = cfg.kernel_config(frame_rate_hz)
    by_approach = {
        "conventional": classify_conventional(gt_points, alg_points, f_max),
        "margin": classify_margin(gt_points, alg_points, f_max, margin_cfg),
        "ink": classify_ink(gt_points, alg_points, f_max, kernel_cfg),
    }
    return {
        name: Cell(counts=counts, measures=compute_measures(counts))
        for name, counts in by_approach.items()
    }


def evaluate_recording(recording: Recording, gt: GroundTruth,
                       seg: SegmentationResult, cfg: EvalConfig | None = None,
                       provenance: Provenance | None = None) -> EvaluationReport:
    """Run the full per-recording evaluation across the granularity cascade."""
    cfg = cfg or EvalConfig()
    provenance = (provenance or Provenance()).stamped()
    if recording.name != gt.recording:
        raise ValidationError(
            f"ground truth is for {gt.recording!r}, not {recording.name!r}"
        )
    if recording.name != seg.recording:
        raise ValidationError(
            f"segmentation is for {seg.recording!r}, not {recording.name!r}"
        )
    gt.validate_against(recording)
    f_max = recording.f_max
    rate = recording.frame_rate_hz
    levels = cascade(gt)
    margin_cfg = cfg.margin_config(rate)
    psme_cfg = cfg.psme_config()
    cells: dict = {}
    psme: dict = {}
    psme_defined: dict = {}
    for g in GRANULARITIES:
        gt_points = levels.level(g)
        cells[g.value] = evaluate_points(gt_points, seg.points, f_max, rate, cfg)
        psme[g.value] = compute_psme(gt_points, seg.points, f_max, psme_cfg, margin_cfg)
        psme_defined[g.value] = psme_min_term_defined(gt_points, seg.points)
    return EvaluationReport(
        recording=recording.name,
        f_max=f_max,
        frame_rate_hz=rate,
        config=cfg.as_dict(rate),
        provenance=provenance,
        dataset_version=provenance.dataset_version,
        cells=cells,
        psme=psme,
        psme_defined=psme_defined,
    )


# ---------------------------------------------------------------------------
# Cross-validation folds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldAssignment:
    """Static recording-to-fold mapping; a pure function of sorted names."""

    folds: dict  # recording name -> fold id

    def fold_of(self, name: str) -> int:
        return self.folds[name]

    def members(self, fold: int) -> tuple[str, ...]:
        return tuple(sorted(n for n, f in self.folds.items() if f == fold))

    def training_names(self, held_out: int) -> tuple[str, ...]:
        return tuple(sorted(n for n, f in self.folds.items() if f != held_out))


def make_folds(names) -> FoldAssignment:
    """Deterministic round-robin split over lexicographically sorted names."""
    names = list(names)
    unique = sorted(set(names))
    if len(unique) != len(names):
        raise ValidationError("recording names must be unique")
    if len(unique) < FOLD_COUNT:
        raise ValidationError(
            f"need at least {FOLD_COUNT} recordings for a {FOLD_COUNT}-fold split, "
            f"got {len(unique)}"
        )
    return FoldAssignment(folds={n: i % FOLD_COUNT for i, n in enumerate(unique)})


# ---------------------------------------------------------------------------
# Dataset aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AggregateReport:
    """Dataset-level summary: pooled-count scores and mean-of-scores.

    Pooled counts weight long recordings more; per-recording means treat
    recordings equally. Both are reported, explicitly labelled.
    """

    recordings: tuple[str, ...]
    config: dict
    pooled: dict  # granularity -> approach -> Cell
    mean_scores: dict  # granularity -> approach -> measure -> mean
    psme: dict  # granularity -> {"mean": float, "total": float}

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "toolkit_version": TOOLKIT_VERSION,
            "kind": "aggregate",
            "recordings": list(self.recordings),
            "config": self.config,
            "pooled": {
                g: {a: cell.as_dict() for a, cell in by_a.items()}
                for g, by_a in self.pooled.items()
            },
            "mean_scores": self.mean_scores,
            "psme": self.psme,
        }


def aggregate(reports) -> AggregateReport:
    """Combine per-recording reports into a dataset summary."""
    reports = list(reports)
    if not reports:
        raise ValidationError("nothing to aggregate: empty report list")
    pooled: dict = {}
    mean_scores: dict = {}
    psme: dict = {}
    for g in GRANULARITIES:
        pooled[g.value] = {}
        mean_scores[g.value] = {}
        for approach in APPROACHES:
            counts = [r.cell(g, approach).counts for r in reports]
            summed = ConfusionCounts(
                tp=sum(c.tp for c in counts),
                tn=sum(c.tn for c in counts),
                fp=sum(c.fp for c in counts),
                fn=sum(c.fn for c in counts),
                f_max=sum(c.f_max for c in counts),
            )
            pooled[g.value][approach] = Cell(
                counts=summed, measures=compute_measures(summed)
            )
            per_measure = {}
            for name in MeasureSet.__dataclass_fields__:
                scores = [getattr(r.cell(g, approach).measures, name) for r in reports]
                per_measure[name] = sum(scores) / len(scores)
            mean_scores[g.value][approach] = per_measure
        values = [r.psme[g.value] for r in reports]
        psme[g.value] = {"mean": sum(values) / len(values), "total": sum(values)}
    return AggregateReport(
        recordings=tuple(sorted(r.recording for r in reports)),
        config=reports[0].config,
        pooled=pooled,
        mean_scores=mean_scores,
        psme=psme,
    )


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def report_to_json(report) -> str:
    """Canonical JSON serialization (sorted keys, stable separators)."""
    return json.dumps(report.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def write_report_json(report, path) -> None:
    Path(path).write_text(report_to_json(report), encoding="utf-8")


def write_reports_csv(reports, path) -> None:
    """Flatten one or more per-recording reports into delimited rows."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for report in reports:
            for row in report.to_csv_rows():
                writer.writerow(row)


def load_report_dict(path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: malformed JSON: {e}") from e
    if "cells" not in doc:
        raise ValidationError(f"{path}: not an evaluation report")
    return doc


def report_dict_to_csv_rows(doc: dict) -> list[dict]:
    rows = []
    for g in GRANULARITIES:
        by_approach = doc["cells"].get(g.value, {})
        for approach in APPROACHES:
            if approach not in by_approach:
                continue
            cell = by_approach[approach]
            row = {
                "recording": doc.get("recording", ""),
                "granularity": g.value,
                "approach": approach,
            }
            for k in ("tp", "tn", "fp", "fn"):
                row[k] = cell["counts"][k]
            row.update(cell["measures"])
            row["psme"] = doc.get("psme", {}).get(g.value, "")
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Dataset directory layout
# ---------------------------------------------------------------------------

def load_dataset(directory) -> list[tuple[Recording, GroundTruth]]:
    """Load (recording, ground truth) pairs from a directory.

    Recordings are ``<name>.json`` or ``<name>.csv`` files; ground truth
    lives next to them as ``<name>.gt.json``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"{directory} is not a directory")
    pairs = []
    for gt_path in sorted(directory.glob("*.gt.json")):
        stem = gt_path.name[: -len(".gt.json")]
        rec_path = directory / f"{stem}.json"
        if not rec_path.exists():
            rec_path = directory / f"{stem}.csv"
        if not rec_path.exists():
            raise ValidationError(f"{gt_path}: no matching recording file")
        recording = load_recording(rec_path)
        gt = load_ground_truth(gt_path)
        gt.validate_against(recording)
        pairs.append((recording, gt))
    if not pairs:
        raise ValidationError(f"{directory}: no ground-truth files found")
    return pairs
