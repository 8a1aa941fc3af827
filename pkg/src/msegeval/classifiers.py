"""Confusion counting for segmentation point sets.

Three approaches turn (ground-truth points, algorithm points, f_max) into
a ConfusionCounts quadruple:

* conventional: exact-frame matching; any offset counts as both fp and fn.
* margin: matching within a fixed temporal margin, inclusive comparison.
* integrated kernel: both point sets are convolved with a unit-mass kernel
  of opposite signs; the positive and negative parts of the summed function
  integrate to real-valued fp and fn areas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ConfusionCounts, MERGE_TOLERANCE, ValidationError, canonicalize_points

GAUSSIAN = "gaussian"
DIRAC = "dirac"


@dataclass(frozen=True)
class MarginConfig:
    """Margin matching parameters, in frames.

    Comparison is inclusive (|s - g| <= margin) by default: a perfect
    segmentation shifted by exactly the margin still scores perfectly.
    Set strict=True for a strictly-smaller comparison.
    """

    margin: float = 20.0
    strict: bool = False

    def __post_init__(self):
        if self.margin <= 0:
            raise ValidationError(f"margin must be positive, got {self.margin}")

    def matches(self, distance: float) -> bool:
        return distance < self.margin if self.strict else distance <= self.margin


@dataclass(frozen=True)
class KernelConfig:
    """Integrated-kernel parameters, in frames.

    quadrature_step defaults to sigma/100 and support_radius to 6*sigma;
    beyond the support radius a kernel's contribution is treated as zero.
    """

    sigma: float = 20.0 / 3.0
    kernel: str = GAUSSIAN
    quadrature_step: float | None = None
    support_radius: float | None = None

    def __post_init__(self):
        if self.kernel not in (GAUSSIAN, DIRAC):
            raise ValidationError(f"unknown kernel {self.kernel!r}")
        if self.kernel == GAUSSIAN and self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.quadrature_step is None:
            object.__setattr__(self, "quadrature_step", self.sigma / 100.0)
        if self.support_radius is None:
            object.__setattr__(self, "support_radius", 6.0 * self.sigma)
        if self.quadrature_step <= 0:
            raise ValidationError("quadrature_step must be positive")
        if self.kernel == GAUSSIAN and self.quadrature_step >= self.sigma:
            raise ValidationError(
                f"quadrature_step {self.quadrature_step} must be smaller than "
                f"sigma {self.sigma}"
            )
        if self.kernel == GAUSSIAN and self.support_radius < 4.0 * self.sigma:
            raise ValidationError("support_radius must be at least 4*sigma")


def _check_range(points, f_max: int, label: str) -> tuple[float, ...]:
    pts = canonicalize_points(points)
    for p in pts:
        if not 0 <= p <= f_max:
            raise ValidationError(f"{label} point {p} outside [0, {f_max}]")
    return pts


def classify_conventional(gt, alg, f_max: int) -> ConfusionCounts:
    """Count matches under exact equality of frame times.

    Equality is up to the duplicate-merge tolerance, so values that only
    differ by wire-level float noise still match.
    """
    gt_pts = _check_range(gt, f_max, "ground-truth")
    alg_pts = _check_range(alg, f_max, "algorithm")
    tp = 0
    i = j = 0
    while i < len(gt_pts) and j < len(alg_pts):
        d = alg_pts[j] - gt_pts[i]
        if abs(d) < MERGE_TOLERANCE:
            tp += 1
            i += 1
            j += 1
        elif d < 0:
            j += 1
        else:
            i += 1
    fp = len(alg_pts) - tp
    fn = len(gt_pts) - tp
    tn = max(f_max - tp - fp - fn, 0)
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn, f_max=f_max)


def classify_margin(gt, alg, f_max: int, cfg: MarginConfig | None = None) -> ConfusionCounts:
    """Count matches within a temporal margin.

    For each ground-truth point g with match set M_g = {s : |s-g| <= margin}:
    an empty M_g counts one fn, otherwise one tp plus |M_g|-1 fp. Algorithm
    points outside every margin add one fp each. A single algorithm point
    lying in two overlapping ground-truth margins is counted as tp twice.
    """
    cfg = cfg or MarginConfig()
    gt_pts = np.asarray(_check_range(gt, f_max, "ground-truth"))
    alg_pts = np.asarray(_check_range(alg, f_max, "algorithm"))
    if len(gt_pts) == 0:
        tp, fn, fp = 0, 0, len(alg_pts)
    elif len(alg_pts) == 0:
        tp, fn, fp = 0, len(gt_pts), 0
    else:
        dist = np.abs(alg_pts[None, :] - gt_pts[:, None])
        hit = dist < cfg.margin if cfg.strict else dist <= cfg.margin
        per_gt = hit.sum(axis=1)
        tp = int((per_gt > 0).sum())
        fn = int((per_gt == 0).sum())
        surplus_in_margin = int((per_gt[per_gt > 0] - 1).sum())
        unmatched_alg = int((~hit.any(axis=0)).sum())
        fp = surplus_in_margin + unmatched_alg
    tn = max(f_max - tp - fp - fn, 0)
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn, f_max=f_max)


# ---------------------------------------------------------------------------
# Integrated kernel approach
# ---------------------------------------------------------------------------

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_CHUNK = 1 << 14  # grid samples per evaluation block


def _gaussian_sum(xs: np.ndarray, centers: np.ndarray, sigma: float) -> np.ndarray:
    """Sum of unit-mass Gaussians centred at each point, evaluated on xs."""
    if len(centers) == 0:
        return np.zeros_like(xs)
    z = (xs[:, None] - centers[None, :]) / sigma
    return np.exp(-0.5 * z * z).sum(axis=1) / (sigma * _SQRT_2PI)


def _merged_intervals(points, radius: float) -> list[tuple[float, float]]:
    """Union of [p-radius, p+radius] over all points, as disjoint intervals."""
    if not points:
        return []
    spans = sorted((p - radius, p + radius) for p in points)
    merged = [spans[0]]
    for lo, hi in spans[1:]:
        if lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _combined_error(xs: np.ndarray, gt: np.ndarray, alg: np.ndarray, sigma: float) -> np.ndarray:
    return _gaussian_sum(xs, alg, sigma) - _gaussian_sum(xs, gt, sigma)


def _integrate_error_parts(gt, alg, cfg: KernelConfig) -> tuple[float, float]:
    """Integrate the positive and negative parts of the combined error.

    Composite trapezoid on the union of kernel supports. Intervals are not
    clipped to [0, f_max]: kernel mass is never renormalized at recording
    boundaries, so the unit-integral property holds on the whole real line.
    """
    gt_a = np.asarray(gt, dtype=float)
    alg_a = np.asarray(alg, dtype=float)
    pos = neg = 0.0
    for lo, hi in _merged_intervals(list(gt) + list(alg), cfg.support_radius):
        n = max(int(math.ceil((hi - lo) / cfg.quadrature_step)), 1)
        h = (hi - lo) / n
        # chunked composite trapezoid; adjacent chunks share their edge sample
        start = 0
        while True:
            stop = min(start + _CHUNK, n)
            xs = lo + h * np.arange(start, stop + 1)
            e = _combined_error(xs, gt_a, alg_a, cfg.sigma)
            pos += np.trapezoid(np.maximum(e, 0.0), dx=h)
            neg += np.trapezoid(np.maximum(-e, 0.0), dx=h)
            if stop == n:
                break
            start = stop
    return pos, neg


def classify_ink(gt, alg, f_max: int, cfg: KernelConfig | None = None) -> ConfusionCounts:
    """Count real-valued matches by integrating signed kernel mixtures.

    The fp area is the integral of the positive part of the combined error,
    the fn area the negated integral of its negative part; the tp area is
    the algorithm's total kernel mass minus the fp area, and tn closes the
    quadruple against f_max. With the dirac kernel this reduces exactly to
    the conventional counting.
    """
    cfg = cfg or KernelConfig()
    if cfg.kernel == DIRAC:
        counts = classify_conventional(gt, alg, f_max)
        return ConfusionCounts(tp=float(counts.tp), tn=float(counts.tn),
                               fp=float(counts.fp), fn=float(counts.fn),
                               f_max=f_max)
    gt_pts = _check_range(gt, f_max, "ground-truth")
    alg_pts = _check_range(alg, f_max, "algorithm")
    a_fp, a_fn = _integrate_error_parts(gt_pts, alg_pts, cfg)
    a_tp = len(alg_pts) - a_fp
    # tiny float negatives are clamped; anything larger is a real bug
    a_tp = 0.0 if -1e-9 < a_tp < 0.0 else a_tp
    a_fp = 0.0 if -1e-9 < a_fp < 0.0 else a_fp
    a_fn = 0.0 if -1e-9 < a_fn < 0.0 else a_fn
    a_tn = f_max - a_tp - a_fp - a_fn
    return ConfusionCounts(tp=a_tp, tn=a_tn, fp=a_fp, fn=a_fn, f_max=f_max)


def sample_error_function(gt, alg, cfg: KernelConfig, t0: float, t1: float,
                          step: float) -> np.ndarray:
    """Sample the segmentation, ground-truth, and combined error functions.

    Returns an array of shape (n, 4) with columns (t, f_s, f_gt, e_c),
    uniformly sampled over [t0, t1]. Gaussian kernel only.
    """
    if t0 >= t1:
        raise ValidationError(f"need t0 < t1, got [{t0}, {t1}]")
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    if cfg.kernel != GAUSSIAN:
        raise ValidationError("error-function sampling requires the gaussian kernel")
    gt_a = np.asarray(canonicalize_points(gt), dtype=float)
    alg_a = np.asarray(canonicalize_points(alg), dtype=float)
    n = max(int(math.ceil((t1 - t0) / step)), 1)
    ts = t0 + (t1 - t0) * np.arange(n + 1) / n
    f_s = _gaussian_sum(ts, alg_a, cfg.sigma)
    f_gt = -_gaussian_sum(ts, gt_a, cfg.sigma)
    return np.column_stack([ts, f_s, f_gt, f_s + f_gt])
