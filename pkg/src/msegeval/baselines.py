"""Reference segmentation algorithms: zero-velocity crossings, windowed
sum-of-squared-velocity minima, and sliding-window principal-subspace
reconstruction error.

Velocities are per-frame central differences (one-sided at the edges), so
velocity-based thresholds are in signal units per frame.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .model import Recording, SegmentationResult, ValidationError


@dataclass(frozen=True)
class ZvcParams:
    """Zero-velocity-crossing parameters.

    noise_floor: velocity magnitude below which a channel sample is ignored.
    min_crossing_channels: channels that must cross in the same frame bin.
    refractory: minimum gap in frames between reported points.
    """

    noise_floor: float = 1e-4
    min_crossing_channels: int = 1
    refractory: float = 0.0

    def __post_init__(self):
        if self.noise_floor < 0:
            raise ValidationError("noise_floor must be non-negative")
        if self.min_crossing_channels < 1:
            raise ValidationError("min_crossing_channels must be at least 1")
        if self.refractory < 0:
            raise ValidationError("refractory must be non-negative")


@dataclass(frozen=True)
class SsavParams:
    """Windowed sum-of-squared-velocities parameters.

    A window minimum is reported only when it undercuts threshold_t while
    staying above noise_threshold.
    """

    window: int = 15
    threshold_t: float = 1e-2
    noise_threshold: float = 1e-9

    def __post_init__(self):
        if self.window < 3:
            raise ValidationError("window must be at least 3 frames")
        if not 0 <= self.noise_threshold < self.threshold_t:
            raise ValidationError(
                "need 0 <= noise_threshold < threshold_t, got "
                f"{self.noise_threshold} vs {self.threshold_t}"
            )


@dataclass(frozen=True)
class PcaParams:
    """Sliding principal-subspace novelty parameters.

    init_window frames fit the subspace; a cut triggers when the mean
    reconstruction error over the trailing init_window/4 frames exceeds
    error_ratio_threshold times the fit-window baseline.
    """

    init_window: int = 40
    retained_energy: float = 0.9
    error_ratio_threshold: float = 3.0

    def __post_init__(self):
        if self.init_window < 2:
            raise ValidationError("init_window must be at least 2 frames")
        if not 0 < self.retained_energy <= 1:
            raise ValidationError("retained_energy must be in (0, 1]")
        if self.error_ratio_threshold <= 1:
            raise ValidationError("error_ratio_threshold must exceed 1")


def velocities(frames: np.ndarray) -> np.ndarray:
    """Per-frame central differences, one-sided at both edges."""
    if frames.shape[0] < 2:
        raise ValidationError("need at least 2 frames to differentiate")
    return np.gradient(frames, axis=0)


def zvc_segment(recording: Recording, params: ZvcParams | None = None) -> SegmentationResult:
    """Segment at frames where enough channels cross zero velocity.

    Sub-floor samples are ignored per channel; a crossing between the
    surviving neighbours is located by linear interpolation and binned to
    its nearest integer frame. Bins reaching min_crossing_channels produce
    a point; points closer than the refractory to their predecessor are
    merged into it.
    """
    params = params or ZvcParams()
    v = velocities(recording.frames)
    n = v.shape[0]
    bins: dict[int, list[float]] = {}
    for c in range(v.shape[1]):
        vc = v[:, c]
        kept = np.flatnonzero(np.abs(vc) > params.noise_floor)
        if kept.size < 2:
            continue
        left, right = kept[:-1], kept[1:]
        flips = np.flatnonzero(np.sign(vc[left]) * np.sign(vc[right]) < 0)
        for i in flips:
            t1, t2 = float(left[i]), float(right[i])
            v1, v2 = vc[left[i]], vc[right[i]]
            t_star = t1 + v1 * (t2 - t1) / (v1 - v2)
            bins.setdefault(int(round(t_star)), []).append(t_star)
    candidates = sorted(
        sum(times) / len(times)
        for times in bins.values()
        if len(times) >= params.min_crossing_channels
    )
    points: list[float] = []
    for t in candidates:
        if points and t - points[-1] < params.refractory:
            continue
        points.append(min(max(t, 0.0), float(n)))
    return SegmentationResult(recording=recording.name, points=tuple(points))


def ssav_series(recording: Recording) -> np.ndarray:
    """Sum of squared per-frame channel velocities."""
    v = velocities(recording.frames)
    return (v * v).sum(axis=1)


def ssav_segment(recording: Recording, params: SsavParams | None = None) -> SegmentationResult:
    """Report windowed minima of the squared-velocity sum between thresholds.

    A frame is reported when it is the minimum of the window centred on it,
    lies strictly between noise_threshold and threshold_t, and is not part
    of a plateau already reported at the previous frame.
    """
    params = params or SsavParams()
    if recording.f_max < params.window:
        raise ValidationError(
            f"recording shorter than the window ({recording.f_max} < {params.window})"
        )
    s = ssav_series(recording)
    half = params.window // 2
    n = s.shape[0]
    points: list[float] = []
    for t in range(n):
        lo = max(t - half, 0)
        hi = min(t + half + 1, n)
        st = s[t]
        if st != s[lo:hi].min():
            continue
        if not (params.noise_threshold < st < params.threshold_t):
            continue
        if points and t - points[-1] == 1:
            continue  # plateau continuation
        points.append(float(t))
    return SegmentationResult(recording=recording.name, points=tuple(points))


# ---------------------------------------------------------------------------
# Principal-subspace novelty
# ---------------------------------------------------------------------------

_ZERO_VARIANCE = 1e-12
_ABSOLUTE_TRIGGER = 1e-9


def _fit_subspace(block: np.ndarray, retained_energy: float):
    """Deterministic principal subspace of a frame block.

    Components are ordered by descending eigenvalue; each eigenvector is
    sign-fixed so its first non-negligible component is positive. Returns
    (mean, components, baseline error, degenerate flag).
    """
    mu = block.mean(axis=0)
    centered = block - mu
    cov = centered.T @ centered / block.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order]
    total = float(evals.sum())
    if total < _ZERO_VARIANCE:
        return mu, np.zeros((block.shape[1], 0)), 0.0, True
    k = int(np.searchsorted(np.cumsum(evals) / total, retained_energy) + 1)
    k = min(k, evecs.shape[1])
    comps = evecs[:, :k].copy()
    for j in range(k):
        col = comps[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            comps[:, j] = -col
    residual = centered - (centered @ comps) @ comps.T
    baseline = float((residual * residual).sum(axis=1).mean())
    return mu, comps, baseline, baseline <= _ZERO_VARIANCE


def _reconstruction_error(frame: np.ndarray, mu: np.ndarray, comps: np.ndarray) -> float:
    d = frame - mu
    r = d - comps @ (comps.T @ d)
    return float(r @ r)


def pca_segment(recording: Recording, params: PcaParams | None = None) -> SegmentationResult:
    """Cut where the reconstruction error of the current subspace rises.

    Fits on the leading init_window frames, tracks the per-frame error of
    subsequent frames, and emits a point at the onset of the error rise
    once the trailing mean exceeds the trigger. Fitting restarts at the
    cut. Degenerate fit windows (constant or perfectly representable data)
    switch the trigger to an absolute epsilon.
    """
    params = params or PcaParams()
    n = recording.f_max
    if n < 2 * params.init_window:
        raise ValidationError(
            f"recording shorter than twice the fit window ({n} < {2 * params.init_window})"
        )
    frames = recording.frames
    trail = max(params.init_window // 4, 1)
    points: list[float] = []
    start = 0
    while start + params.init_window < n:
        mu, comps, baseline, degenerate = _fit_subspace(
            frames[start: start + params.init_window], params.retained_energy
        )
        trigger = _ABSOLUTE_TRIGGER if degenerate else params.error_ratio_threshold * baseline
        window_err: list[tuple[int, float]] = []
        cut = None
        for t in range(start + params.init_window, n):
            err = _reconstruction_error(frames[t], mu, comps)
            window_err.append((t, err))
            if len(window_err) > trail:
                window_err.pop(0)
            if len(window_err) == trail:
                mean_err = sum(e for _, e in window_err) / trail
                if mean_err > trigger:
                    cut = next((u for u, e in window_err if e > trigger), t)
                    break
        if cut is None:
            break
        points.append(float(cut))
        start = cut
    return SegmentationResult(recording=recording.name, points=tuple(points))


# ---------------------------------------------------------------------------
# Registry for the CLI and protocol clients
# ---------------------------------------------------------------------------

BASELINES = {
    "zvc": (ZvcParams, zvc_segment),
    "ssav": (SsavParams, ssav_segment),
    "pca": (PcaParams, pca_segment),
}


def make_params(algo: str, overrides: dict | None = None):
    """Build a parameter object for a named baseline from string overrides."""
    if algo not in BASELINES:
        raise ValidationError(
            f"unknown algorithm {algo!r}; expected one of {sorted(BASELINES)}"
        )
    params_cls, _ = BASELINES[algo]
    kwargs = {}
    valid = {f.name: f.type for f in fields(params_cls)}
    for key, value in (overrides or {}).items():
        if key not in valid:
            raise ValidationError(f"{algo} has no parameter {key!r}")
        kwargs[key] = type(getattr(params_cls(), key))(value)
    return params_cls(**kwargs)


def run_baseline(algo: str, recording: Recording, params=None) -> SegmentationResult:
    if algo not in BASELINES:
        raise ValidationError(
            f"unknown algorithm {algo!r}; expected one of {sorted(BASELINES)}"
        )
    _, fn = BASELINES[algo]
    return fn(recording, params)
