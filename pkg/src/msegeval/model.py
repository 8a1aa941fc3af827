"""Core domain types and file formats for segmentation evaluation.

Canonical internal time unit is real-valued frames. Configuration values
given in milliseconds (margin, kernel width) are converted with the
recording's frame rate at evaluation time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

# Points closer than this (in frames) are treated as duplicates and merged.
MERGE_TOLERANCE = 1e-9


class ValidationError(ValueError):
    """Malformed, inconsistent, or out-of-domain input data."""


class Granularity(Enum):
    """Label level of a ground-truth segmentation point, totally ordered."""

    ROUGH = "rough"
    MEDIUM = "medium"
    FINE = "fine"

    @property
    def rank(self) -> int:
        return _GRANULARITY_RANK[self]

    def __lt__(self, other: "Granularity") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "Granularity") -> bool:
        return self.rank <= other.rank

    @classmethod
    def parse(cls, label: str) -> "Granularity":
        try:
            return cls(label.lower())
        except ValueError:
            raise ValidationError(f"unknown granularity {label!r}") from None


_GRANULARITY_RANK = {Granularity.ROUGH: 0, Granularity.MEDIUM: 1, Granularity.FINE: 2}

GRANULARITIES = (Granularity.ROUGH, Granularity.MEDIUM, Granularity.FINE)


def time_ms_to_frames(t_ms: float, frame_rate_hz: float) -> float:
    """Convert a duration in milliseconds to real-valued frames."""
    if frame_rate_hz <= 0:
        raise ValidationError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    return t_ms * frame_rate_hz / 1000.0


def frames_to_time_ms(frames: float, frame_rate_hz: float) -> float:
    """Inverse of :func:`time_ms_to_frames`."""
    if frame_rate_hz <= 0:
        raise ValidationError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    return frames * 1000.0 / frame_rate_hz


def canonicalize_points(points) -> tuple[float, ...]:
    """Sort points ascending and merge near-duplicates to their mean.

    Points closer than ``MERGE_TOLERANCE`` frames are collapsed into a
    single point at the mean of the run. Idempotent.
    """
    pts = sorted(float(p) for p in points)
    if not pts:
        return ()
    merged: list[float] = []
    run = [pts[0]]
    for p in pts[1:]:
        if p - run[-1] < MERGE_TOLERANCE:
            run.append(p)
        else:
            merged.append(sum(run) / len(run))
            run = [p]
    merged.append(sum(run) / len(run))
    return tuple(merged)


@dataclass(frozen=True)
class Recording:
    """Multi-channel sampled trajectory, one row per frame.

    frames has shape (f_max, len(channels)); made read-only on construction.
    """

    name: str
    frame_rate_hz: float
    channels: tuple[str, ...]
    frames: np.ndarray

    def __post_init__(self):
        if self.frame_rate_hz <= 0:
            raise ValidationError(
                f"frame_rate_hz must be positive, got {self.frame_rate_hz}"
            )
        arr = np.asarray(self.frames, dtype=float)
        if arr.ndim != 2:
            raise ValidationError(f"frames must be 2-dimensional, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValidationError("a recording needs at least one frame")
        if arr.shape[1] != len(self.channels):
            raise ValidationError(
                f"each frame row must have {len(self.channels)} entries, "
                f"got {arr.shape[1]}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def f_max(self) -> int:
        """Total number of frames."""
        return self.frames.shape[0]


@dataclass(frozen=True)
class GroundTruth:
    """Hand-labelled segmentation points, each tagged with a granularity."""

    recording: str
    points: tuple[tuple[float, Granularity], ...]

    def __post_init__(self):
        pts = sorted((float(t), g) for t, g in self.points)
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if b - a < MERGE_TOLERANCE:
                raise ValidationError(f"duplicate ground-truth time {b}")
        object.__setattr__(self, "points", tuple(pts))

    def times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.points)

    def validate_against(self, recording: Recording) -> None:
        if recording.name != self.recording:
            raise ValidationError(
                f"ground truth is for {self.recording!r}, not {recording.name!r}"
            )
        for t, _ in self.points:
            if not 0 <= t <= recording.f_max:
                raise ValidationError(
                    f"ground-truth point {t} outside [0, {recording.f_max}]"
                )


@dataclass(frozen=True)
class SegmentationResult:
    """Points reported by an algorithm for one recording, canonicalized."""

    recording: str
    points: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", canonicalize_points(self.points))


@dataclass(frozen=True)
class ConfusionCounts:
    """Real-valued (tp, tn, fp, fn) quadruple closed by f_max.

    Integer-valued for the conventional and margin approaches; real-valued
    for the integrated-kernel approach. Tiny negative values from
    floating-point are clamped to zero.
    """

    tp: float
    tn: float
    fp: float
    fn: float
    f_max: int

    def __post_init__(self):
        if self.f_max < 1:
            raise ValidationError(f"f_max must be a positive integer, got {self.f_max}")
        for name in ("tp", "tn", "fp", "fn"):
            v = float(getattr(self, name))
            if v < -1e-6:
                raise ValidationError(f"{name} is negative: {v}")
            object.__setattr__(self, name, max(v, 0.0))

    @property
    def total(self) -> float:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
                "f_max": self.f_max}


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _infer_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix == ".csv":
        return "csv"
    raise ValidationError(f"cannot infer format from {path.name!r}; pass format=")


def load_recording(path, format: str | None = None) -> Recording:
    """Load a recording from JSON or CSV (frame rate via sidecar meta file)."""
    path = Path(path)
    fmt = format or _infer_format(path)
    if fmt == "json":
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: malformed JSON: {e}") from e
        try:
            rows = doc["frames"]
            _reject_ragged(rows, path)
            return Recording(
                name=doc["name"],
                frame_rate_hz=doc["frame_rate_hz"],
                channels=tuple(doc["channels"]),
                frames=np.asarray(rows, dtype=float),
            )
        except KeyError as e:
            raise ValidationError(f"{path}: missing key {e}") from e
    if fmt == "csv":
        meta_path = path.parent / (path.stem + ".meta.json")
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ValidationError(f"{path}: sidecar {meta_path.name} not found") from None
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValidationError(f"{path}: empty CSV") from None
            if not header or header[0] != "t":
                raise ValidationError(f"{path}: CSV header must start with 't'")
            channels = tuple(header[1:])
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(header):
                    raise ValidationError(
                        f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}"
                    )
                rows.append([float(v) for v in row[1:]])
        if not rows:
            raise ValidationError(f"{path}: no frames")
        return Recording(
            name=path.stem,
            frame_rate_hz=meta["frame_rate_hz"],
            channels=channels,
            frames=np.asarray(rows, dtype=float),
        )
    raise ValidationError(f"unknown recording format {fmt!r}")


def _reject_ragged(rows, path) -> None:
    lengths = {len(r) for r in rows}
    if len(lengths) > 1:
        raise ValidationError(f"{path}: frame rows have inconsistent lengths")


def save_recording(recording: Recording, path, format: str | None = None) -> None:
    """Write a recording; floats use shortest round-trip repr (bit-exact)."""
    path = Path(path)
    fmt = format or _infer_format(path)
    if fmt == "json":
        doc = {
            "name": recording.name,
            "frame_rate_hz": recording.frame_rate_hz,
            "channels": list(recording.channels),
            "frames": [[float(v) for v in row] for row in recording.frames],
        }
        path.write_text(json.dumps(doc) + "\n", encoding="utf-8")
        return
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *recording.channels])
            for i, row in enumerate(recording.frames):
                writer.writerow([i, *(repr(float(v)) for v in row)])
        meta_path = path.parent / (path.stem + ".meta.json")
        meta_path.write_text(
            json.dumps({"frame_rate_hz": recording.frame_rate_hz}) + "\n",
            encoding="utf-8",
        )
        return
    raise ValidationError(f"unknown recording format {fmt!r}")


def load_ground_truth(path) -> GroundTruth:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: malformed JSON: {e}") from e
    try:
        points = tuple(
            (float(p["frame"]), Granularity.parse(p["granularity"]))
            for p in doc["points"]
        )
        return GroundTruth(recording=doc["recording"], points=points)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{path}: bad ground-truth document: {e}") from e


def save_ground_truth(gt: GroundTruth, path) -> None:
    doc = {
        "recording": gt.recording,
        "points": [
            {"frame": float(t), "granularity": g.value} for t, g in gt.points
        ],
    }
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_segmentation(path) -> SegmentationResult:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: malformed JSON: {e}") from e
    try:
        return SegmentationResult(
            recording=doc["recording"],
            points=tuple(float(p) for p in doc["points"]),
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"{path}: bad segmentation document: {e}") from e


def save_segmentation(seg: SegmentationResult, path) -> None:
    doc = {"recording": seg.recording, "points": [float(p) for p in seg.points]}
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")
