"""Synthetic recordings with hierarchical ground truth, and the seven
benchmark scenarios used to compare the matching approaches."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (
    Granularity,
    GroundTruth,
    Recording,
    ValidationError,
    canonicalize_points,
)


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic segmentation scenario against a fixed ground truth.

    Scenarios c through f are reconstructions: their exact extra-point
    placement is not uniquely determined, so their kernel-approach scores
    are indicative rather than reference values.
    """

    id: str
    gt_points: tuple[float, ...]
    alg_points: tuple[float, ...]
    f_max: int
    reconstructed: bool
    description: str

    def __post_init__(self):
        for p in (*self.gt_points, *self.alg_points):
            if not 0 <= p <= self.f_max:
                raise ValidationError(f"scenario {self.id}: point {p} out of range")


def make_scenarios() -> list[ScenarioSpec]:
    """Seven scenarios over gt = {20, 50, 80} and 100 frames.

    a) perfect; b) every point 1 frame late; c) b plus a spurious point at
    35; d) c with the last point moved to frame 90; e, f, g) the matched
    offsets of d grow by a further 1, 4, and 5 frames cumulatively (the
    spurious point stays put).
    """
    gt = (20.0, 50.0, 80.0)
    f_max = 100
    extra = 35.0

    def offs(matched_offset: float, last: float) -> tuple[float, ...]:
        return canonicalize_points(
            (20 + matched_offset, 50 + matched_offset, last, extra)
        )

    return [
        ScenarioSpec("a", gt, gt, f_max, False, "perfect segmentation"),
        ScenarioSpec("b", gt, (21.0, 51.0, 81.0), f_max, False,
                     "every point one frame late"),
        ScenarioSpec("c", gt, canonicalize_points((21, 51, 81, extra)), f_max, True,
                     "one frame late plus a spurious point"),
        ScenarioSpec("d", gt, offs(1, 90), f_max, True,
                     "as c with the last point ten frames late"),
        ScenarioSpec("e", gt, offs(2, 91), f_max, True, "offsets of d grown by 1"),
        ScenarioSpec("f", gt, offs(6, 95), f_max, True, "offsets of d grown by 5"),
        ScenarioSpec("g", gt, offs(11, 100), f_max, False, "offsets of d grown by 10"),
    ]


# ---------------------------------------------------------------------------
# Synthetic recordings
# ---------------------------------------------------------------------------

SINE = "sine"
STILL = "still"
RAMP = "ramp"


@dataclass(frozen=True)
class Activity:
    """One building block of a synthetic recording.

    sine: per-channel sinusoidal bursts, ``reps`` full periods over the
    duration; still: hold the current value; ramp: linear drift by the
    per-channel amplitude over the duration.
    """

    kind: str
    duration: int
    amplitudes: tuple[float, ...]
    reps: int = 1

    def __post_init__(self):
        if self.kind not in (SINE, STILL, RAMP):
            raise ValidationError(f"unknown activity kind {self.kind!r}")
        if self.duration < 2:
            raise ValidationError(f"activity duration must be >= 2, got {self.duration}")
        if self.kind == SINE and self.reps < 1:
            raise ValidationError("a sine activity needs at least one repetition")
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic synthetic recording: activities concatenated in order."""

    name: str
    seed: int
    frame_rate_hz: float
    activities: tuple[Activity, ...]
    noise_std: float = 0.0

    def __post_init__(self):
        if not self.activities:
            raise ValidationError("a synthetic recording needs at least one activity")
        widths = {len(a.amplitudes) for a in self.activities}
        if len(widths) != 1:
            raise ValidationError("all activities must declare the same channel count")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be non-negative")
        object.__setattr__(self, "activities", tuple(self.activities))

    @property
    def n_channels(self) -> int:
        return len(self.activities[0].amplitudes)


def make_recording(spec: SynthSpec) -> tuple[Recording, GroundTruth]:
    """Render a spec into a recording plus hierarchical ground truth.

    Rough points sit at activity boundaries, medium points at repetition
    boundaries inside a sine activity, fine points at the two extrema of
    each repetition. Deterministic for a given spec (seeded noise).
    """
    n_ch = spec.n_channels
    rng = np.random.default_rng(spec.seed)
    segments: list[np.ndarray] = []
    points: list[tuple[float, Granularity]] = []
    level = np.zeros(n_ch)
    offset = 0
    for idx, act in enumerate(spec.activities):
        t = np.arange(act.duration, dtype=float)
        amps = np.asarray(act.amplitudes)
        if act.kind == SINE:
            period = act.duration / act.reps
            phase = 2.0 * math.pi * t / period
            block = level[None, :] + amps[None, :] * np.sin(phase)[:, None]
            for rep in range(act.reps):
                rep_start = offset + rep * period
                if rep > 0:
                    points.append((rep_start, Granularity.MEDIUM))
                points.append((rep_start + period / 4.0, Granularity.FINE))
                points.append((rep_start + 3.0 * period / 4.0, Granularity.FINE))
        elif act.kind == RAMP:
            block = level[None, :] + amps[None, :] * (t / act.duration)[:, None]
            level = level + amps
        else:
            block = np.tile(level, (act.duration, 1))
        if idx > 0:
            points.append((float(offset), Granularity.ROUGH))
        segments.append(block)
        offset += act.duration
    frames = np.vstack(segments)
    if spec.noise_std > 0:
        frames = frames + rng.normal(0.0, spec.noise_std, size=frames.shape)
    recording = Recording(
        name=spec.name,
        frame_rate_hz=spec.frame_rate_hz,
        channels=tuple(f"q{i}" for i in range(n_ch)),
        frames=frames,
    )
    gt = GroundTruth(recording=spec.name, points=tuple(points))
    gt.validate_against(recording)
    return recording, gt


def load_synth_specs(path) -> list[SynthSpec]:
    """Read one spec or a list of specs from a JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: malformed JSON: {e}") from e
    docs = doc if isinstance(doc, list) else [doc]
    specs = []
    for i, d in enumerate(docs):
        try:
            activities = tuple(
                Activity(
                    kind=a["kind"],
                    duration=int(a["duration"]),
                    amplitudes=tuple(a["amplitudes"]),
                    reps=int(a.get("reps", 1)),
                )
                for a in d["activities"]
            )
            specs.append(
                SynthSpec(
                    name=d["name"],
                    seed=int(d.get("seed", 0)),
                    frame_rate_hz=float(d.get("frame_rate_hz", 100.0)),
                    activities=activities,
                    noise_std=float(d.get("noise_std", 0.0)),
                )
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"{path}: bad spec entry {i}: {e}") from e
    return specs


def demo_dataset(count: int, seed: int = 0, frame_rate_hz: float = 100.0) -> list[SynthSpec]:
    """A small family of varied specs, handy for harness and protocol tests."""
    if count < 1:
        raise ValidationError("count must be positive")
    specs = []
    for i in range(count):
        reps = 2 + (i % 3)
        specs.append(
            SynthSpec(
                name=f"synth{i:02d}",
                seed=seed + i,
                frame_rate_hz=frame_rate_hz,
                activities=(
                    Activity(SINE, 120 + 20 * (i % 2), (1.0, 0.4), reps=reps),
                    Activity(STILL, 60, (0.0, 0.0)),
                    Activity(SINE, 160, (0.5, 1.2), reps=2),
                ),
            )
        )
    return specs
