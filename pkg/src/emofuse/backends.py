"""Annotation storage, corpus manifests and synthetic corpus generation.

Two JSON formats live here.  Per-image *sidecar* files carry detector
outputs, per-person emotion estimates and the raw classifier scores.
*Manifest* files name a corpus: its task, the shared fusion
parameters, and one entry per image with an optional ground-truth
label.  Loading is strict about values (out-of-range fields are
rejected, never clamped); unknown fields are rejected in strict mode
and logged otherwise.

A deterministic generator produces synthetic annotations with known
labels, so tests and benchmarks can build corpora with known optimal
decisions.
"""

from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .core import (
    VAD_MAX,
    VAD_MIN,
    BinaryScores,
    BoundingBox,
    Detection,
    FusionParams,
    Label,
    PersonVAD,
    validate_scores,
)
from .errors import (
    DuplicateImageId,
    InvalidSpec,
    MissingSidecar,
    NonFiniteScore,
    NotAProbabilityPair,
    ParseError,
    RangeError,
)
from .fusion import infer_image
from .traits import PERSON_LABEL

logger = logging.getLogger(__name__)

PARAM_FIELDS = (
    "adjust_factor",
    "neutral_low",
    "neutral_high",
    "detection_threshold",
    "coverage_threshold",
)


class Task(str, Enum):
    """Recognition task a corpus belongs to."""

    CHILD_LABOUR = "child_labour"
    DISPLACED_POPULATIONS = "displaced_populations"


@dataclass(frozen=True, slots=True)
class ImageAnnotations:
    """Everything known about one image before inference.

    ``person_vads`` must align one-to-one, in order, with the
    detections that pass the person filter under the corpus params.
    That alignment cannot be checked here (it depends on the manifest's
    detection threshold); inference raises MisalignedAnnotations when
    it does not hold.
    """

    image_id: str
    detections: tuple[Detection, ...]
    person_vads: tuple[PersonVAD, ...]
    raw_scores: BinaryScores
    ground_truth: Label | None = None

    def __post_init__(self) -> None:
        if not self.image_id:
            raise ValueError("image_id must be non-empty")


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    """One manifest line: an image, its sidecar, optional ground truth."""

    image_id: str
    sidecar: Path
    ground_truth: Label | None = None


@dataclass(frozen=True, slots=True)
class SkippedEntry:
    """A source image an exporter could not process."""

    source: str
    reason: str


@dataclass(frozen=True, slots=True)
class DatasetManifest:
    """A named corpus: task, shared parameters and image entries."""

    name: str
    task: Task
    params: FusionParams
    entries: tuple[ManifestEntry, ...]
    skipped: tuple[SkippedEntry, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("manifest name must be non-empty")
        if not self.entries:
            raise ValueError("a manifest must list at least one entry")
        seen: set[str] = set()
        for entry in self.entries:
            if entry.image_id in seen:
                raise DuplicateImageId(
                    f"image_id {entry.image_id!r} appears more than once"
                )
            seen.add(entry.image_id)


# ---- shared JSON plumbing --------------------------------------------------


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via a temp file in the destination directory plus rename.

    Readers never observe a partial file; on failure the destination is
    left untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _read_json(path: Path) -> object:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError(f"{path}: file does not exist") from None
    except IsADirectoryError:
        raise ParseError(f"{path}: is a directory, not a file") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def _handle_unknown(
    obj: dict, known: frozenset[str] | set[str], where: str, strict: bool
) -> None:
    unknown = sorted(set(obj) - set(known))
    if not unknown:
        return
    joined = ", ".join(repr(name) for name in unknown)
    if strict:
        raise ParseError(f"{where}: unknown field(s) {joined}")
    logger.warning("%s: ignoring unknown field(s) %s", where, joined)


def _as_float(value: object, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where} must be a number, got {value!r}")
    return float(value)


def _as_non_empty_str(value: object, where: str) -> str:
    if not isinstance(value, str) or not value:
        raise ParseError(f"{where} must be a non-empty string")
    return value


# ---- sidecar files ----------------------------------------------------------


def load_annotations(path: str | Path, strict: bool = False) -> ImageAnnotations:
    """Read one sidecar file.

    Parameters
    ----------
    path:
        Sidecar JSON file.
    strict:
        When true, unknown fields anywhere in the document are an
        error; otherwise they are logged and ignored.

    Raises
    ------
    ParseError
        On missing files, malformed JSON or wrong field types.
    RangeError
        When a value is outside its legal range (emotions off the
        [1, 10] scale, confidences outside [0, 1], score pairs that do
        not sum to one).  Values are never clamped.
    """
    path = Path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: sidecar root must be an object")
    _handle_unknown(
        doc, {"image_id", "detections", "person_vads", "raw_scores"}, str(path), strict
    )
    image_id = _as_non_empty_str(doc.get("image_id"), f"{path}: image_id")
    detections = _parse_detections(doc.get("detections"), path, strict)
    person_vads = _parse_person_vads(doc.get("person_vads"), path, strict)
    raw_scores = _parse_raw_scores(doc.get("raw_scores"), path, strict)
    return ImageAnnotations(
        image_id=image_id,
        detections=tuple(detections),
        person_vads=tuple(person_vads),
        raw_scores=raw_scores,
    )


def _parse_detections(value: object, path: Path, strict: bool) -> list[Detection]:
    if not isinstance(value, list):
        raise ParseError(f"{path}: 'detections' must be an array")
    out: list[Detection] = []
    for i, item in enumerate(value):
        where = f"{path}: detections[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where} must be an object")
        _handle_unknown(item, {"box", "label", "confidence"}, where, strict)
        coords = item.get("box")
        if not isinstance(coords, list) or len(coords) != 4:
            raise ParseError(f"{where}.box must be an array of four numbers")
        numbers = [_as_float(c, f"{where}.box[{j}]") for j, c in enumerate(coords)]
        try:
            box = BoundingBox(*numbers)
        except ValueError as exc:
            raise RangeError(f"{where}.box", numbers, f"{where}.box: {exc}") from exc
        label = _as_non_empty_str(item.get("label"), f"{where}.label")
        confidence = _as_float(item.get("confidence"), f"{where}.confidence")
        try:
            out.append(Detection(box=box, class_label=label, confidence=confidence))
        except ValueError as exc:
            raise RangeError(
                f"{where}.confidence", confidence, f"{where}: {exc}"
            ) from exc
    return out


def _parse_person_vads(value: object, path: Path, strict: bool) -> list[PersonVAD]:
    if not isinstance(value, list):
        raise ParseError(f"{path}: 'person_vads' must be an array")
    out: list[PersonVAD] = []
    for i, item in enumerate(value):
        where = f"{path}: person_vads[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where} must be an object")
        _handle_unknown(item, {"valence", "arousal", "dominance"}, where, strict)
        values = {}
        for dim in ("valence", "arousal", "dominance"):
            if dim not in item:
                raise ParseError(f"{where}: missing field {dim!r}")
            number = _as_float(item[dim], f"{where}.{dim}")
            if not math.isfinite(number) or not (VAD_MIN <= number <= VAD_MAX):
                raise RangeError(f"{where}.{dim}", number)
            values[dim] = number
        out.append(PersonVAD(**values))
    return out


def _parse_raw_scores(value: object, path: Path, strict: bool) -> BinaryScores:
    where = f"{path}: raw_scores"
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be an object")
    _handle_unknown(value, {"violation", "no_violation"}, where, strict)
    for key in ("violation", "no_violation"):
        if key not in value:
            raise ParseError(f"{where}: missing field {key!r}")
    violation = _as_float(value["violation"], f"{where}.violation")
    no_violation = _as_float(value["no_violation"], f"{where}.no_violation")
    try:
        return validate_scores(violation, no_violation)
    except (NonFiniteScore, NotAProbabilityPair) as exc:
        raise RangeError(
            "raw_scores", (violation, no_violation), f"{where}: {exc}"
        ) from exc


def save_annotations(annotations: ImageAnnotations, path: str | Path) -> None:
    """Write one sidecar file.

    Floats are written at full round-trip precision, so saving and
    re-loading reproduces the values exactly.  Ground truth is never
    written here; it belongs to the manifest.
    """
    doc = {
        "image_id": annotations.image_id,
        "detections": [
            {
                "box": [d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max],
                "label": d.class_label,
                "confidence": d.confidence,
            }
            for d in annotations.detections
        ],
        "person_vads": [
            {"valence": p.valence, "arousal": p.arousal, "dominance": p.dominance}
            for p in annotations.person_vads
        ],
        "raw_scores": {
            "violation": annotations.raw_scores.s_violation,
            "no_violation": annotations.raw_scores.s_no_violation,
        },
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


# ---- manifest files ----------------------------------------------------------


def load_manifest(path: str | Path, strict: bool = False) -> DatasetManifest:
    """Read a corpus manifest and resolve its sidecar paths.

    Sidecar paths are interpreted relative to the manifest's directory
    and must exist.  Fusion params may be given partially; missing
    fields take their defaults.

    Raises
    ------
    ParseError
        On malformed JSON, wrong field types, unknown params or an
        empty entry list.
    DuplicateImageId
        When two entries share an image id.
    MissingSidecar
        When a referenced sidecar file does not exist.
    """
    path = Path(path)
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: manifest root must be an object")
    _handle_unknown(
        doc, {"name", "task", "params", "entries", "skipped"}, str(path), strict
    )
    name = _as_non_empty_str(doc.get("name"), f"{path}: name")
    task_value = doc.get("task")
    try:
        task = Task(task_value)
    except ValueError:
        valid = ", ".join(t.value for t in Task)
        raise ParseError(
            f"{path}: 'task' must be one of {valid}, got {task_value!r}"
        ) from None
    params = _parse_params(doc.get("params", {}), f"{path}: params")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list) or not raw_entries:
        raise ParseError(f"{path}: 'entries' must be a non-empty array")
    base = path.resolve().parent
    seen: set[str] = set()
    entries: list[ManifestEntry] = []
    for i, item in enumerate(raw_entries):
        where = f"{path}: entries[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where} must be an object")
        _handle_unknown(item, {"image_id", "sidecar", "ground_truth"}, where, strict)
        image_id = _as_non_empty_str(item.get("image_id"), f"{where}.image_id")
        if image_id in seen:
            raise DuplicateImageId(
                f"{path}: image_id {image_id!r} appears more than once"
            )
        seen.add(image_id)
        sidecar_value = _as_non_empty_str(item.get("sidecar"), f"{where}.sidecar")
        sidecar = Path(sidecar_value)
        if not sidecar.is_absolute():
            sidecar = base / sidecar
        if not sidecar.is_file():
            raise MissingSidecar(f"{where}: sidecar file {sidecar} does not exist")
        ground_truth = _parse_ground_truth(item.get("ground_truth"), where)
        entries.append(
            ManifestEntry(image_id=image_id, sidecar=sidecar, ground_truth=ground_truth)
        )
    skipped = _parse_skipped(doc.get("skipped", []), path, strict)
    return DatasetManifest(
        name=name,
        task=task,
        params=params,
        entries=tuple(entries),
        skipped=tuple(skipped),
    )


def _parse_params(value: object, where: str) -> FusionParams:
    if not isinstance(value, dict):
        raise ParseError(f"{where} must be an object")
    # A misspelt parameter would silently fall back to its default, so
    # unknown keys here are always an error, even in lenient mode.
    unknown = sorted(set(value) - set(PARAM_FIELDS))
    if unknown:
        joined = ", ".join(repr(name) for name in unknown)
        raise ParseError(f"{where}: unknown parameter(s) {joined}")
    numbers = {
        name: _as_float(value[name], f"{where}.{name}")
        for name in PARAM_FIELDS
        if name in value
    }
    try:
        return FusionParams(**numbers)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _parse_ground_truth(value: object, where: str) -> Label | None:
    if value is None:
        return None
    try:
        return Label(value)
    except ValueError:
        valid = ", ".join(label.value for label in Label)
        raise ParseError(
            f"{where}.ground_truth must be null or one of {valid}, got {value!r}"
        ) from None


def _parse_skipped(value: object, path: Path, strict: bool) -> list[SkippedEntry]:
    if not isinstance(value, list):
        raise ParseError(f"{path}: 'skipped' must be an array")
    out: list[SkippedEntry] = []
    for i, item in enumerate(value):
        where = f"{path}: skipped[{i}]"
        if not isinstance(item, dict):
            raise ParseError(f"{where} must be an object")
        _handle_unknown(item, {"source", "reason"}, where, strict)
        out.append(
            SkippedEntry(
                source=_as_non_empty_str(item.get("source"), f"{where}.source"),
                reason=_as_non_empty_str(item.get("reason"), f"{where}.reason"),
            )
        )
    return out


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write a manifest file.

    Sidecar paths that live under the manifest's directory are written
    relative to it, so a corpus directory can be moved as a unit.
    """
    path = Path(path)
    base = path.resolve().parent
    entries = []
    for entry in manifest.entries:
        sidecar = Path(entry.sidecar)
        try:
            rendered = str(sidecar.resolve().relative_to(base))
        except ValueError:
            rendered = str(sidecar)
        entries.append(
            {
                "image_id": entry.image_id,
                "sidecar": rendered,
                "ground_truth": (
                    entry.ground_truth.value if entry.ground_truth else None
                ),
            }
        )
    doc: dict[str, object] = {
        "name": manifest.name,
        "task": manifest.task.value,
        "params": {name: getattr(manifest.params, name) for name in PARAM_FIELDS},
        "entries": entries,
    }
    if manifest.skipped:
        doc["skipped"] = [
            {"source": s.source, "reason": s.reason} for s in manifest.skipped
        ]
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


# ---- synthetic corpus generation ---------------------------------------------

TRUTH_RULES = ("raw_argmax", "adjusted_argmax", "violation", "no_violation")

_DECOY_LABELS = ("dog", "car", "tree", "bicycle")


@dataclass(frozen=True)
class GenerationSpec:
    """Distribution parameters for synthetic annotations.

    person_count
        Inclusive range for the number of persons that pass the
        detection filter.  Decoy detections (other classes, or persons
        below the confidence threshold) are added on top.
    vad_bounds
        Uniform sampling bounds for every emotional dimension.
    score_bounds
        Uniform sampling bounds for the raw violation score; its
        complement fills the pair.
    truth_rule
        How ground truth is assigned: ``raw_argmax`` follows the raw
        scores, ``adjusted_argmax`` follows the trait-adjusted decision
        under ``params``, and ``violation`` / ``no_violation`` are
        constant labels.
    params
        Fusion parameters the generated corpus is aligned with; the
        detection threshold decides which sampled persons count.
    """

    person_count: tuple[int, int] = (0, 4)
    vad_bounds: tuple[float, float] = (VAD_MIN, VAD_MAX)
    score_bounds: tuple[float, float] = (0.0, 1.0)
    truth_rule: str = "raw_argmax"
    params: FusionParams = field(default_factory=FusionParams)

    def __post_init__(self) -> None:
        lo, hi = self.person_count
        if isinstance(lo, bool) or isinstance(hi, bool):
            raise InvalidSpec("person_count bounds must be integers")
        if not (isinstance(lo, int) and isinstance(hi, int)):
            raise InvalidSpec("person_count bounds must be integers")
        if lo < 0 or lo > hi:
            raise InvalidSpec(
                f"person_count must satisfy 0 <= min <= max, got ({lo}, {hi})"
            )
        vlo, vhi = self.vad_bounds
        if not (
            math.isfinite(vlo)
            and math.isfinite(vhi)
            and VAD_MIN <= vlo <= vhi <= VAD_MAX
        ):
            raise InvalidSpec(
                f"vad_bounds must satisfy {VAD_MIN} <= low <= high <= {VAD_MAX}, "
                f"got ({vlo}, {vhi})"
            )
        slo, shi = self.score_bounds
        if not (
            math.isfinite(slo) and math.isfinite(shi) and 0.0 <= slo <= shi <= 1.0
        ):
            raise InvalidSpec(
                f"score_bounds must satisfy 0 <= low <= high <= 1, got ({slo}, {shi})"
            )
        if self.truth_rule not in TRUTH_RULES:
            raise InvalidSpec(
                f"truth_rule must be one of {', '.join(TRUTH_RULES)}, "
                f"got {self.truth_rule!r}"
            )
        if hi > 0 and self.params.detection_threshold > 1.0 - 1e-6:
            raise InvalidSpec(
                "detection_threshold is too close to 1 to sample passing persons"
            )


def synthesize_case(seed: int, spec: GenerationSpec) -> ImageAnnotations:
    """Generate one annotated image, deterministically.

    The output is a pure function of ``(seed, spec)``: calling twice
    with the same arguments returns bit-identical annotations.  The
    sampled persons all pass the detection filter under
    ``spec.params``; a small number of decoy detections (non-person
    classes, or persons at or below the threshold) is mixed in so the
    filter has work to do.
    """
    rng = np.random.default_rng(seed)
    lo, hi = spec.person_count
    person_total = int(rng.integers(lo, hi + 1))
    threshold = spec.params.detection_threshold
    vlo, vhi = spec.vad_bounds

    detections: list[Detection] = []
    person_vads: list[PersonVAD] = []
    for _ in range(person_total):
        box = _random_box(rng)
        # Uniform in (threshold, 1); the lower margin keeps the draw
        # strictly above the threshold.
        confidence = threshold + (1.0 - threshold) * float(rng.uniform(0.05, 1.0))
        detections.append(Detection(box, PERSON_LABEL, confidence))
        person_vads.append(
            PersonVAD(
                valence=float(rng.uniform(vlo, vhi)),
                arousal=float(rng.uniform(vlo, vhi)),
                dominance=float(rng.uniform(vlo, vhi)),
            )
        )
    for _ in range(int(rng.integers(0, 3))):
        box = _random_box(rng)
        if float(rng.uniform(0.0, 1.0)) < 0.5:
            # A person the filter must drop.
            confidence = threshold * float(rng.uniform(0.0, 0.95))
            detections.append(Detection(box, PERSON_LABEL, confidence))
        else:
            label = _DECOY_LABELS[int(rng.integers(0, len(_DECOY_LABELS)))]
            detections.append(
                Detection(box, label, float(rng.uniform(0.05, 1.0)))
            )

    slo, shi = spec.score_bounds
    s_violation = float(rng.uniform(slo, shi))
    raw_scores = BinaryScores(s_violation, 1.0 - s_violation)

    return ImageAnnotations(
        image_id=f"synth-{seed:08d}",
        detections=tuple(detections),
        person_vads=tuple(person_vads),
        raw_scores=raw_scores,
        ground_truth=_assign_truth(spec, raw_scores, detections, person_vads),
    )


def _assign_truth(
    spec: GenerationSpec,
    raw_scores: BinaryScores,
    detections: list[Detection],
    person_vads: list[PersonVAD],
) -> Label:
    if spec.truth_rule == "violation":
        return Label.VIOLATION
    if spec.truth_rule == "no_violation":
        return Label.NO_VIOLATION
    if spec.truth_rule == "raw_argmax":
        return raw_scores.winning_label
    return infer_image(raw_scores, detections, person_vads, spec.params).label


def _random_box(rng: np.random.Generator) -> BoundingBox:
    x_min = float(rng.uniform(0.0, 600.0))
    y_min = float(rng.uniform(0.0, 400.0))
    width = float(rng.uniform(8.0, 220.0))
    height = float(rng.uniform(8.0, 220.0))
    return BoundingBox(x_min, y_min, x_min + width, y_min + height)
