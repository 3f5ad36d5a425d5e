"""Emotion-aware decision fusion for abuse-risk image classification.

Detected persons carry continuous valence/arousal/dominance estimates;
the averaged valence and dominance of an image steer a rule-based
adjustment of a binary classifier's probability pair.  The package
also defines the annotation file formats, a deterministic synthetic
corpus generator, and an accuracy/coverage evaluation harness with
VAD ensembling.
"""

from __future__ import annotations

from . import errors
from .backends import (
    DatasetManifest,
    GenerationSpec,
    ImageAnnotations,
    ManifestEntry,
    SkippedEntry,
    Task,
    atomic_write_text,
    load_annotations,
    load_manifest,
    save_annotations,
    save_manifest,
    synthesize_case,
)
from .core import (
    BinaryScores,
    BoundingBox,
    Decision,
    Detection,
    FusionParams,
    GlobalEmotionalTraits,
    Label,
    Mode,
    PersonVAD,
    validate_scores,
)
from .evaluation import (
    EvaluationReport,
    MetricDelta,
    ModeSummary,
    ReportRow,
    RunResult,
    accuracy,
    build_report,
    coverage,
    ensemble_vad,
    fit_ensemble_weights,
    mean_error_rate,
    read_report_rows,
    render_report_csv,
    render_report_json,
    report_to_dict,
    round_half_up,
    summarize,
)
from .fusion import (
    AdjustmentTrace,
    Dimension,
    adjust_for_dimension,
    apply_get_adjustment,
    infer_image,
    infer_image_traced,
)
from .traits import PERSON_LABEL, compute_get, filter_persons, get_pair_score

__version__ = "0.1.0"

__all__ = [
    "errors",
    "AdjustmentTrace",
    "BinaryScores",
    "BoundingBox",
    "DatasetManifest",
    "Decision",
    "Detection",
    "Dimension",
    "EvaluationReport",
    "FusionParams",
    "GenerationSpec",
    "GlobalEmotionalTraits",
    "ImageAnnotations",
    "Label",
    "ManifestEntry",
    "MetricDelta",
    "Mode",
    "ModeSummary",
    "PERSON_LABEL",
    "PersonVAD",
    "ReportRow",
    "RunResult",
    "SkippedEntry",
    "Task",
    "accuracy",
    "adjust_for_dimension",
    "apply_get_adjustment",
    "atomic_write_text",
    "build_report",
    "compute_get",
    "coverage",
    "ensemble_vad",
    "filter_persons",
    "fit_ensemble_weights",
    "get_pair_score",
    "infer_image",
    "infer_image_traced",
    "load_annotations",
    "load_manifest",
    "mean_error_rate",
    "read_report_rows",
    "render_report_csv",
    "render_report_json",
    "report_to_dict",
    "round_half_up",
    "save_annotations",
    "save_manifest",
    "summarize",
    "synthesize_case",
    "validate_scores",
]
