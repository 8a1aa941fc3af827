"""Evaluation toolkit for time-series motion segmentation algorithms."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ConfusionCounts,
    Granularity,
    GroundTruth,
    Recording,
    SegmentationResult,
    ValidationError,
    canonicalize_points,
    frames_to_time_ms,
    time_ms_to_frames,
)
from .classifiers import (  # noqa: F401
    KernelConfig,
    MarginConfig,
    classify_conventional,
    classify_ink,
    classify_margin,
    sample_error_function,
)
from .measures import (  # noqa: F401
    MeasureSet,
    PsmeConfig,
    compute_measures,
    compute_psme,
)
from .pipeline import (  # noqa: F401
    EvalConfig,
    EvaluationReport,
    Provenance,
    aggregate,
    cascade,
    evaluate_recording,
    make_folds,
)
