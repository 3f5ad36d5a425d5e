"""Metrics, VAD ensembling and report building for decision runs.

Accuracy is computed over every image, covered or not, so a run that
answers confidently on nothing still gets an accuracy number.
Coverage is the fraction of images whose winning score reaches the
coverage threshold.  Reports carry percentages; rendering rounds them
to two decimals (half-up) while the in-memory values keep full
precision.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Sequence
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .backends import PARAM_FIELDS, DatasetManifest
from .core import VAD_MAX, VAD_MIN, Decision, FusionParams, Label, Mode, PersonVAD
from .errors import (
    EmptySet,
    LengthMismatch,
    MissingGroundTruth,
    MissingMode,
    ParseError,
    WeightsNotNormalized,
)

WEIGHT_SUM_TOLERANCE = 1e-9

CSV_HEADER = ("config", "mode", "accuracy", "coverage")


# ---- decision metrics -------------------------------------------------------


def accuracy(decisions: Sequence[Decision], truths: Sequence[Label]) -> float:
    """Fraction of decisions whose label matches the ground truth.

    Every image counts, including uncovered ones; low-confidence runs
    are scored on everything they decided, however tentatively.
    """
    if len(decisions) != len(truths):
        raise LengthMismatch(
            f"got {len(decisions)} decisions for {len(truths)} ground-truth labels"
        )
    if not decisions:
        raise EmptySet("accuracy over zero images is undefined")
    hits = sum(1 for d, t in zip(decisions, truths) if d.label == t)
    return hits / len(decisions)


def coverage(decisions: Sequence[Decision], params: FusionParams) -> float:
    """Fraction of decisions whose winning score reaches the threshold.

    The comparison is inclusive and re-evaluated against ``params``,
    so a decision set can be re-thresholded without re-running
    inference.
    """
    if not decisions:
        raise EmptySet("coverage over zero images is undefined")
    covered = sum(
        1 for d in decisions if d.scores.max_score >= params.coverage_threshold
    )
    return covered / len(decisions)


# ---- VAD regression metrics and ensembling ----------------------------------


def _vad_array(values: Sequence[PersonVAD]) -> np.ndarray:
    return np.array(
        [(p.valence, p.arousal, p.dominance) for p in values], dtype=float
    ).reshape(len(values), 3)


def mean_error_rate(
    predicted: Sequence[PersonVAD], truth: Sequence[PersonVAD]
) -> float:
    """Mean absolute error, averaged over samples and all three dimensions."""
    if len(predicted) != len(truth):
        raise LengthMismatch(
            f"got {len(predicted)} predictions for {len(truth)} ground-truth values"
        )
    if not predicted:
        raise EmptySet("mean error rate over zero samples is undefined")
    return float(np.mean(np.abs(_vad_array(predicted) - _vad_array(truth))))


def ensemble_vad(
    predictions: Sequence[Sequence[PersonVAD]], weights: Sequence[float]
) -> list[PersonVAD]:
    """Blend per-model VAD predictions with a fixed weight per model.

    Parameters
    ----------
    predictions:
        One prediction list per model, all the same length and aligned
        sample by sample.
    weights:
        One non-negative weight per model, summing to one within
        WEIGHT_SUM_TOLERANCE.

    Returns
    -------
    list[PersonVAD]
        The element-wise, dimension-wise weighted average.
    """
    if len(predictions) != len(weights):
        raise LengthMismatch(
            f"got {len(weights)} weights for {len(predictions)} models"
        )
    if not predictions:
        raise EmptySet("an ensemble needs at least one model")
    w = np.asarray(weights, dtype=float)
    if not np.isfinite(w).all() or (w < 0.0).any():
        raise WeightsNotNormalized(f"weights must be finite and non-negative: {w}")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise WeightsNotNormalized(
            f"weights must sum to 1 within {WEIGHT_SUM_TOLERANCE}, got {total!r}"
        )
    n = len(predictions[0])
    for i, preds in enumerate(predictions):
        if len(preds) != n:
            raise LengthMismatch(
                f"model {i} has {len(preds)} predictions, expected {n}"
            )
    stack = np.stack([_vad_array(p) for p in predictions])
    blended = np.tensordot(w / total, stack, axes=1)
    # The exact convex combination stays inside [1, 10]; shave float dust.
    blended = np.clip(blended, VAD_MIN, VAD_MAX)
    return [PersonVAD(float(v), float(a), float(d)) for v, a, d in blended]


def fit_ensemble_weights(
    predictions: Sequence[Sequence[PersonVAD]],
    truth: Sequence[PersonVAD],
    grid_step: float = 0.05,
) -> tuple[float, ...]:
    """Search the weight simplex for the lowest-error ensemble.

    Every weight vector on the simplex grid with the given step is
    tried exhaustively, in lexicographic order; ties keep the first
    (lexicographically smallest) vector.  The result never scores
    worse than the best single model, because the one-hot vectors are
    on the grid.

    Parameters
    ----------
    predictions:
        Validation-set predictions, one list per model (at least two).
    truth:
        Validation-set ground truth, aligned with every model.
    grid_step:
        Grid resolution; must divide 1 evenly.
    """
    k = len(predictions)
    if k < 2:
        raise ValueError(f"weight fitting needs at least two models, got {k}")
    if not truth:
        raise EmptySet("weight fitting needs a non-empty validation set")
    for i, preds in enumerate(predictions):
        if len(preds) != len(truth):
            raise LengthMismatch(
                f"model {i} has {len(preds)} predictions for {len(truth)} "
                "ground-truth values"
            )
    if not (0.0 < grid_step <= 1.0):
        raise ValueError(f"grid_step must lie in (0, 1], got {grid_step}")
    units = round(1.0 / grid_step)
    if units < 1 or abs(units * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step must divide 1 evenly, got {grid_step}")

    stack = np.stack([_vad_array(p) for p in predictions])
    target = _vad_array(truth)
    best_error = math.inf
    best: tuple[float, ...] | None = None
    for counts in _compositions(units, k):
        w = np.array(counts, dtype=float) / units
        error = float(np.mean(np.abs(np.tensordot(w, stack, axes=1) - target)))
        if error < best_error:
            best_error = error
            best = tuple(float(x) for x in w)
    assert best is not None
    return best


def _compositions(total: int, k: int):
    """Yield all k-tuples of non-negative ints summing to total, ascending."""
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first, *rest)


# ---- run results and reports --------------------------------------------------


@dataclass(frozen=True)
class RunResult:
    """Decisions one configuration produced in one mode."""

    config_name: str
    mode: Mode
    decisions: tuple[Decision, ...]

    def __post_init__(self) -> None:
        if not self.config_name:
            raise ValueError("config_name must be non-empty")


@dataclass(frozen=True)
class ReportRow:
    """Accuracy and coverage of one configuration in one mode, in percent."""

    config: str
    mode: Mode
    accuracy_pct: float
    coverage_pct: float

    def __post_init__(self) -> None:
        for name in ("accuracy_pct", "coverage_pct"):
            value = getattr(self, name)
            if not math.isfinite(value) or not (0.0 <= value <= 100.0):
                raise ValueError(f"{name} must lie in [0, 100], got {value!r}")


@dataclass(frozen=True)
class ModeSummary:
    """Mean accuracy and coverage over one mode's rows, in percent."""

    accuracy_pct: float
    coverage_pct: float


@dataclass(frozen=True)
class MetricDelta:
    """Change from vanilla to the adjusted mode, in percentage points.

    ``relative`` expresses the absolute delta as a percentage of the
    vanilla mean and is None when that baseline is zero.
    """

    absolute: float
    relative: float | None


@dataclass(frozen=True)
class EvaluationReport:
    """Rows plus per-mode means and vanilla-to-adjusted deltas."""

    params: FusionParams
    rows: tuple[ReportRow, ...]
    vanilla: ModeSummary | None
    get_aid: ModeSummary | None
    accuracy_delta: MetricDelta | None
    coverage_delta: MetricDelta | None


def build_report(rows: Sequence[ReportRow], params: FusionParams) -> EvaluationReport:
    """Aggregate rows into per-mode means and deltas.

    Means are plain column means per mode.  Deltas (get_aid minus
    vanilla, relative to the vanilla mean) appear only when both modes
    are present.
    """
    rows = tuple(rows)
    if not rows:
        raise EmptySet("a report needs at least one row")
    vanilla = _mode_summary(r for r in rows if r.mode is Mode.VANILLA)
    get_aid = _mode_summary(r for r in rows if r.mode is Mode.GET_AID)
    accuracy_delta = coverage_delta = None
    if vanilla is not None and get_aid is not None:
        accuracy_delta = _metric_delta(vanilla.accuracy_pct, get_aid.accuracy_pct)
        coverage_delta = _metric_delta(vanilla.coverage_pct, get_aid.coverage_pct)
    return EvaluationReport(
        params=params,
        rows=rows,
        vanilla=vanilla,
        get_aid=get_aid,
        accuracy_delta=accuracy_delta,
        coverage_delta=coverage_delta,
    )


def _mode_summary(rows) -> ModeSummary | None:
    rows = list(rows)
    if not rows:
        return None
    return ModeSummary(
        accuracy_pct=math.fsum(r.accuracy_pct for r in rows) / len(rows),
        coverage_pct=math.fsum(r.coverage_pct for r in rows) / len(rows),
    )


def _metric_delta(baseline: float, adjusted: float) -> MetricDelta:
    absolute = adjusted - baseline
    relative = None if baseline == 0.0 else absolute / baseline * 100.0
    return MetricDelta(absolute=absolute, relative=relative)


def summarize(
    results: Sequence[RunResult], manifest: DatasetManifest
) -> EvaluationReport:
    """Score run results against a manifest and aggregate them.

    Every configuration must appear in both modes; every manifest
    entry must carry ground truth.  Rows come out grouped by
    configuration, vanilla before get_aid.
    """
    missing = [e.image_id for e in manifest.entries if e.ground_truth is None]
    if missing:
        raise MissingGroundTruth(
            f"manifest entries without ground truth: {', '.join(missing)}"
        )
    truths = [e.ground_truth for e in manifest.entries]

    grouped: dict[str, dict[Mode, RunResult]] = {}
    for result in results:
        if len(result.decisions) != len(manifest.entries):
            raise LengthMismatch(
                f"config {result.config_name!r} ({result.mode.value}) has "
                f"{len(result.decisions)} decisions for {len(manifest.entries)} "
                "manifest entries"
            )
        modes = grouped.setdefault(result.config_name, {})
        if result.mode in modes:
            raise ValueError(
                f"duplicate result for config {result.config_name!r} "
                f"mode {result.mode.value}"
            )
        modes[result.mode] = result

    rows: list[ReportRow] = []
    for config, modes in grouped.items():
        for mode in (Mode.VANILLA, Mode.GET_AID):
            if mode not in modes:
                raise MissingMode(
                    f"config {config!r} lacks mode {mode.value}"
                )
        for mode in (Mode.VANILLA, Mode.GET_AID):
            result = modes[mode]
            rows.append(
                ReportRow(
                    config=config,
                    mode=mode,
                    accuracy_pct=accuracy(result.decisions, truths) * 100.0,
                    coverage_pct=coverage(result.decisions, manifest.params) * 100.0,
                )
            )
    return build_report(rows, manifest.params)


# ---- rendering and parsing ----------------------------------------------------


def round_half_up(value: float, places: int = 2) -> float:
    """Round half away from zero at the given decimal place."""
    quantum = Decimal(1).scaleb(-places)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def _format_pct(value: float) -> str:
    return f"{round_half_up(value):.2f}"


def render_report_csv(report: EvaluationReport) -> str:
    """Render the per-row table: config,mode,accuracy,coverage."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow(
            [
                row.config,
                row.mode.value,
                _format_pct(row.accuracy_pct),
                _format_pct(row.coverage_pct),
            ]
        )
    return buffer.getvalue()


def report_to_dict(report: EvaluationReport) -> dict:
    """Mirror a report as plain JSON-ready data, percentages rounded."""

    def summary(s: ModeSummary | None):
        if s is None:
            return None
        return {
            "accuracy": round_half_up(s.accuracy_pct),
            "coverage": round_half_up(s.coverage_pct),
        }

    def delta(d: MetricDelta | None):
        if d is None:
            return None
        return {
            "absolute": round_half_up(d.absolute),
            "relative": None if d.relative is None else round_half_up(d.relative),
        }

    deltas = None
    if report.accuracy_delta is not None:
        deltas = {
            "accuracy": delta(report.accuracy_delta),
            "coverage": delta(report.coverage_delta),
        }
    return {
        "params": {name: getattr(report.params, name) for name in PARAM_FIELDS},
        "rows": [
            {
                "config": r.config,
                "mode": r.mode.value,
                "accuracy": round_half_up(r.accuracy_pct),
                "coverage": round_half_up(r.coverage_pct),
            }
            for r in report.rows
        ],
        "means": {
            "vanilla": summary(report.vanilla),
            "get_aid": summary(report.get_aid),
        },
        "deltas": deltas,
    }


def render_report_json(report: EvaluationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def read_report_rows(path: str | Path) -> list[ReportRow]:
    """Parse a report CSV back into rows.

    The header must be exactly ``config,mode,accuracy,coverage``;
    accuracy and coverage are percentages.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"{path}: file does not exist") from None
    except IsADirectoryError:
        raise ParseError(f"{path}: is a directory, not a file") from None
    records = list(csv.reader(io.StringIO(text)))
    if not records or tuple(records[0]) != CSV_HEADER:
        raise ParseError(
            f"{path}: header must be exactly {','.join(CSV_HEADER)}"
        )
    rows: list[ReportRow] = []
    for lineno, record in enumerate(records[1:], start=2):
        if not record:
            continue
        if len(record) != 4:
            raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(record)}")
        config, mode_value, accuracy_text, coverage_text = record
        if not config:
            raise ParseError(f"{path}:{lineno}: config must be non-empty")
        try:
            mode = Mode(mode_value)
        except ValueError:
            raise ParseError(
                f"{path}:{lineno}: unknown mode {mode_value!r}"
            ) from None
        try:
            accuracy_pct = float(accuracy_text)
            coverage_pct = float(coverage_text)
        except ValueError:
            raise ParseError(
                f"{path}:{lineno}: accuracy and coverage must be numbers"
            ) from None
        try:
            rows.append(ReportRow(config, mode, accuracy_pct, coverage_pct))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows
