"""Command-line interface.

Subcommands: ``classify`` (decide a corpus), ``evaluate`` (score it
against ground truth), ``compare`` (vanilla vs trait-adjusted result
tables), ``fit-ensemble`` (VAD ensemble weights) and ``synth``
(deterministic synthetic corpora).

Exit codes: 0 success, 1 failed --expect assertion, 2 usage error,
3 data error (unreadable or invalid inputs), 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .backends import (
    PARAM_FIELDS,
    TRUTH_RULES,
    DatasetManifest,
    ImageAnnotations,
    ManifestEntry,
    Task,
    atomic_write_text,
    load_annotations,
    load_manifest,
    save_annotations,
    save_manifest,
    synthesize_case,
    GenerationSpec,
)
from .core import Decision, FusionParams, Mode, PersonVAD
from .errors import (
    EmofuseError,
    ExpectationFailed,
    InvalidSpec,
    ManifestMismatch,
    MissingGroundTruth,
    ParseError,
    RangeError,
)
from .evaluation import (
    ReportRow,
    accuracy,
    build_report,
    coverage,
    ensemble_vad,
    fit_ensemble_weights,
    mean_error_rate,
    read_report_rows,
    render_report_csv,
    render_report_json,
)
from .fusion import AdjustmentTrace, infer_image_traced

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

# Default directory for outputs when --output is not given.
OUTPUT_DIR_ENV = "EMOFUSE_OUTPUT_DIR"

_PROGRESS_EVERY = 250


class UsageError(EmofuseError):
    """Bad flag combination or value, caught after argument parsing."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved invocation of classify or evaluate."""

    manifest_path: Path
    output_path: Path
    overrides: dict[str, float]
    mode: str
    worker_count: int
    strict_parsing: bool


# ---- argument plumbing -------------------------------------------------------

_PARAM_DEFAULTS = FusionParams()

_PARAM_HELP = {
    "adjust_factor": "probability mass shifted per unit of distance from the neutral zone",
    "neutral_low": "inclusive lower bound of the neutral zone",
    "neutral_high": "inclusive upper bound of the neutral zone",
    "detection_threshold": "persons at or below this detector confidence are ignored",
    "coverage_threshold": "minimum winning score for a decision to count as covered",
}


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("fusion parameters")
    for name in PARAM_FIELDS:
        default = getattr(_PARAM_DEFAULTS, name)
        group.add_argument(
            f"--{name.replace('_', '-')}",
            type=float,
            default=None,
            metavar="X",
            help=f"{_PARAM_HELP[name]} (default: {default})",
        )


def _add_output_flag(parser: argparse.ArgumentParser, what: str) -> None:
    parser.add_argument(
        "--output",
        "-o",
        default=None,
        help=f"{what}; defaults into ${OUTPUT_DIR_ENV} or the working directory",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emofuse",
        description=(
            "Emotion-aware decision fusion: classify annotated image corpora, "
            "evaluate and compare runs, fit VAD ensembles, generate synthetic "
            "corpora."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "classify",
        help="decide every image in a corpus",
        description=(
            "Run inference over a manifest and write one JSON record per "
            "image and mode, in manifest order."
        ),
    )
    p.add_argument("--manifest", required=True, help="corpus manifest JSON")
    p.add_argument(
        "--mode",
        choices=("vanilla", "get_aid", "both"),
        default="both",
        help="which decision modes to emit (default: both)",
    )
    p.add_argument(
        "--workers",
        type=int,
        default=1,
        metavar="N",
        help="worker threads; output order is manifest order regardless (default: 1)",
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="reject unknown fields in annotation files instead of warning",
    )
    _add_output_flag(p, "decision records file (JSON lines)")
    _add_param_flags(p)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser(
        "evaluate",
        help="score a corpus against its ground truth",
        description=(
            "Run inference over a manifest whose entries all carry ground "
            "truth, and write accuracy/coverage reports as CSV and JSON."
        ),
    )
    p.add_argument("--manifest", required=True, help="corpus manifest JSON")
    p.add_argument(
        "--mode",
        choices=("vanilla", "get_aid", "both"),
        default="both",
        help="which modes to score (default: both)",
    )
    p.add_argument(
        "--workers",
        type=int,
        default=1,
        metavar="N",
        help="worker threads (default: 1)",
    )
    p.add_argument(
        "--strict",
        action="store_true",
        help="reject unknown fields in annotation files instead of warning",
    )
    _add_output_flag(p, "report base path; .csv and .json are appended")
    _add_param_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "compare",
        help="compare vanilla and trait-adjusted result tables",
        description=(
            "Read two report CSVs covering the same configurations, compute "
            "per-mode means and deltas, and optionally assert expectations."
        ),
    )
    p.add_argument("--vanilla", required=True, help="report CSV for the vanilla runs")
    p.add_argument(
        "--get-aid", required=True, help="report CSV for the trait-adjusted runs"
    )
    p.add_argument(
        "--expect",
        action="append",
        nargs=4,
        default=[],
        metavar=("METRIC", "TARGET", "VALUE", "TOLERANCE"),
        help=(
            "assert METRIC (accuracy|coverage) of TARGET (vanilla|get_aid|"
            "absolute|relative) equals VALUE within TOLERANCE; repeatable; "
            "any violation exits 1"
        ),
    )
    _add_output_flag(p, "comparison report base path; .csv and .json are appended")
    _add_param_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser(
        "fit-ensemble",
        help="fit VAD ensemble weights on a validation set",
        description=(
            "Exhaustively search the weight simplex for the combination of "
            "VAD predictors with the lowest mean error."
        ),
    )
    p.add_argument(
        "--predictions",
        nargs="+",
        required=True,
        metavar="FILE",
        help="two or more JSON files, each an array of [valence, arousal, dominance]",
    )
    p.add_argument(
        "--truth",
        required=True,
        metavar="FILE",
        help="ground-truth JSON file in the same format",
    )
    p.add_argument(
        "--grid-step",
        type=float,
        default=0.05,
        metavar="X",
        help="weight grid resolution; must divide 1 evenly (default: 0.05)",
    )
    _add_output_flag(p, "fitted weights JSON file")
    p.set_defaults(func=_cmd_fit_ensemble)

    p = sub.add_parser(
        "synth",
        help="generate a deterministic synthetic corpus",
        description=(
            "Write sidecar files plus a manifest for a synthetic corpus; "
            "the same seed and flags always produce identical files."
        ),
    )
    p.add_argument("--seed", type=int, default=0, help="base seed (default: 0)")
    p.add_argument(
        "--count", type=int, default=100, metavar="N", help="images to generate (default: 100)"
    )
    p.add_argument("--name", default="synthetic", help="manifest name (default: synthetic)")
    p.add_argument(
        "--task",
        choices=[t.value for t in Task],
        default=Task.CHILD_LABOUR.value,
        help="task recorded in the manifest (default: child_labour)",
    )
    p.add_argument(
        "--person-min", type=int, default=0, metavar="N",
        help="minimum persons passing the filter per image (default: 0)",
    )
    p.add_argument(
        "--person-max", type=int, default=4, metavar="N",
        help="maximum persons passing the filter per image (default: 4)",
    )
    p.add_argument(
        "--vad-low", type=float, default=1.0, metavar="X",
        help="lower bound for sampled emotion values (default: 1.0)",
    )
    p.add_argument(
        "--vad-high", type=float, default=10.0, metavar="X",
        help="upper bound for sampled emotion values (default: 10.0)",
    )
    p.add_argument(
        "--score-low", type=float, default=0.0, metavar="X",
        help="lower bound for the sampled raw violation score (default: 0.0)",
    )
    p.add_argument(
        "--score-high", type=float, default=1.0, metavar="X",
        help="upper bound for the sampled raw violation score (default: 1.0)",
    )
    p.add_argument(
        "--truth-rule",
        choices=TRUTH_RULES,
        default="raw_argmax",
        help="how ground truth is assigned (default: raw_argmax)",
    )
    _add_output_flag(p, "corpus directory")
    _add_param_flags(p)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help.
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"emofuse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExpectationFailed as exc:
        print(f"emofuse: expectation failed: {exc}", file=sys.stderr)
        return EXIT_EXPECTATION
    except (EmofuseError, OSError) as exc:
        print(f"emofuse: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # pragma: no cover - last-resort diagnostics
        traceback.print_exc()
        return EXIT_INTERNAL


def entrypoint() -> None:  # pragma: no cover - console script shim
    sys.exit(main())


# ---- shared helpers ------------------------------------------------------------


def _collect_overrides(args: argparse.Namespace) -> dict[str, float]:
    overrides = {
        name: getattr(args, name)
        for name in PARAM_FIELDS
        if getattr(args, name, None) is not None
    }
    # Overrides must be coherent on their own before any file is read.
    try:
        _merge_params(_PARAM_DEFAULTS, overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return overrides


def _merge_params(base: FusionParams, overrides: dict[str, float]) -> FusionParams:
    values = {name: getattr(base, name) for name in PARAM_FIELDS}
    values.update(overrides)
    return FusionParams(**values)


def _merge_manifest_params(
    manifest: DatasetManifest, overrides: dict[str, float]
) -> FusionParams:
    try:
        return _merge_params(manifest.params, overrides)
    except ValueError as exc:
        raise UsageError(f"flag overrides conflict with manifest params: {exc}") from exc


def _resolve_output(value: str | None, default_name: str) -> Path:
    if value:
        return Path(value)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / default_name
    return Path(default_name)


def _modes(value: str) -> list[Mode]:
    if value == "both":
        return [Mode.VANILLA, Mode.GET_AID]
    return [Mode(value)]


def _positive_workers(value: int) -> int:
    if value < 1:
        raise UsageError(f"--workers must be at least 1, got {value}")
    return value


def _load_corpus(
    manifest: DatasetManifest, strict: bool
) -> list[ImageAnnotations]:
    annotations = []
    for entry in manifest.entries:
        try:
            loaded = load_annotations(entry.sidecar, strict=strict)
        except EmofuseError as exc:
            raise EmofuseError(f"image {entry.image_id}: {exc}") from exc
        if loaded.image_id != entry.image_id:
            raise EmofuseError(
                f"image {entry.image_id}: sidecar {entry.sidecar} belongs to "
                f"image_id {loaded.image_id!r}"
            )
        annotations.append(loaded)
    return annotations


def _decide(
    annotations: ImageAnnotations, params: FusionParams, mode: Mode
) -> tuple[Decision, list[AdjustmentTrace]]:
    if mode is Mode.VANILLA:
        return Decision.from_scores(annotations.raw_scores, params), []
    return infer_image_traced(
        annotations.raw_scores,
        annotations.detections,
        annotations.person_vads,
        params,
    )


def _map_entries(work, items, workers: int) -> list:
    if workers <= 1:
        return [work(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields results in input order, so the worker count never
        # changes the output sequence.
        return list(pool.map(work, items))


# ---- classify -------------------------------------------------------------------


def _decision_line(
    image_id: str, mode: Mode, decision: Decision, traces: list[AdjustmentTrace]
) -> str:
    get = None
    if decision.get is not None:
        get = {
            "valence": decision.get.d1_valence,
            "dominance": decision.get.d2_dominance,
            "person_count": decision.get.person_count,
        }
    record = {
        "image_id": image_id,
        "mode": mode.value,
        "label": decision.label.value,
        "scores": {
            "violation": decision.scores.s_violation,
            "no_violation": decision.scores.s_no_violation,
        },
        "covered": decision.covered,
        "get": get,
        "traces": [
            {
                "dimension": t.dimension.value,
                "delta_from_neutral": t.delta_from_neutral,
                "applied_adjustment": t.applied_adjustment,
                "capped": t.capped,
            }
            for t in traces
        ],
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _cmd_classify(args: argparse.Namespace) -> int:
    config = RunConfig(
        manifest_path=Path(args.manifest),
        output_path=_resolve_output(args.output, "decisions.jsonl"),
        overrides=_collect_overrides(args),
        mode=args.mode,
        worker_count=_positive_workers(args.workers),
        strict_parsing=args.strict,
    )
    manifest = load_manifest(config.manifest_path, strict=config.strict_parsing)
    params = _merge_manifest_params(manifest, config.overrides)
    annotations = _load_corpus(manifest, config.strict_parsing)
    modes = _modes(config.mode)

    def work(item: tuple[ManifestEntry, ImageAnnotations]) -> list[str]:
        entry, loaded = item
        try:
            return [
                _decision_line(entry.image_id, mode, *_decide(loaded, params, mode))
                for mode in modes
            ]
        except EmofuseError as exc:
            raise EmofuseError(f"image {entry.image_id}: {exc}") from exc

    nested = _map_entries(work, list(zip(manifest.entries, annotations)), config.worker_count)
    lines = [line for group in nested for line in group]
    atomic_write_text(config.output_path, "".join(line + "\n" for line in lines))
    print(
        f"classified {len(manifest.entries)} images "
        f"({len(lines)} records) -> {config.output_path}",
        file=sys.stderr,
    )
    return EXIT_OK


# ---- evaluate -------------------------------------------------------------------


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = RunConfig(
        manifest_path=Path(args.manifest),
        output_path=_resolve_output(args.output, "report"),
        overrides=_collect_overrides(args),
        mode=args.mode,
        worker_count=_positive_workers(args.workers),
        strict_parsing=args.strict,
    )
    manifest = load_manifest(config.manifest_path, strict=config.strict_parsing)
    params = _merge_manifest_params(manifest, config.overrides)
    missing = [e.image_id for e in manifest.entries if e.ground_truth is None]
    if missing:
        raise MissingGroundTruth(
            f"manifest entries without ground truth: {', '.join(missing)}"
        )
    truths = [e.ground_truth for e in manifest.entries]
    annotations = _load_corpus(manifest, config.strict_parsing)

    rows = []
    for mode in _modes(config.mode):
        def work(item: tuple[ManifestEntry, ImageAnnotations]) -> Decision:
            entry, loaded = item
            try:
                return _decide(loaded, params, mode)[0]
            except EmofuseError as exc:
                raise EmofuseError(f"image {entry.image_id}: {exc}") from exc

        decisions = _map_entries(
            work, list(zip(manifest.entries, annotations)), config.worker_count
        )
        rows.append(
            ReportRow(
                config=manifest.name,
                mode=mode,
                accuracy_pct=accuracy(decisions, truths) * 100.0,
                coverage_pct=coverage(decisions, params) * 100.0,
            )
        )
    report = build_report(rows, params)
    _write_report(report, config.output_path)
    return EXIT_OK


def _write_report(report, base: Path) -> None:
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    csv_path = base.with_suffix(".csv")
    json_path = base.with_suffix(".json")
    atomic_write_text(csv_path, render_report_csv(report))
    atomic_write_text(json_path, render_report_json(report))
    print(f"wrote {csv_path} and {json_path}", file=sys.stderr)


# ---- compare --------------------------------------------------------------------


def _relabeled_rows(path: str, mode: Mode) -> list[ReportRow]:
    rows = read_report_rows(path)
    out = []
    for row in rows:
        if row.mode is not mode:
            print(
                f"emofuse: note: {path}: row for config {row.config!r} is marked "
                f"{row.mode.value}; treating it as {mode.value}",
                file=sys.stderr,
            )
        out.append(
            ReportRow(
                config=row.config,
                mode=mode,
                accuracy_pct=row.accuracy_pct,
                coverage_pct=row.coverage_pct,
            )
        )
    return out


def _expect_value(report, metric: str, target: str) -> float | None:
    summary = {"vanilla": report.vanilla, "get_aid": report.get_aid}.get(target)
    if summary is not None:
        return getattr(summary, f"{metric}_pct")
    delta = report.accuracy_delta if metric == "accuracy" else report.coverage_delta
    if delta is None:
        return None
    return delta.absolute if target == "absolute" else delta.relative


def _parse_expectations(
    raw_expectations: list[tuple[str, str, str, str]],
) -> list[tuple[str, str, float, float]]:
    parsed = []
    for metric, target, value_text, tolerance_text in raw_expectations:
        if metric not in ("accuracy", "coverage"):
            raise UsageError(f"--expect metric must be accuracy or coverage, got {metric!r}")
        if target not in ("vanilla", "get_aid", "absolute", "relative"):
            raise UsageError(
                "--expect target must be vanilla, get_aid, absolute or relative, "
                f"got {target!r}"
            )
        try:
            value = float(value_text)
            tolerance = float(tolerance_text)
        except ValueError:
            raise UsageError(
                f"--expect value and tolerance must be numbers, got {value_text!r} "
                f"and {tolerance_text!r}"
            ) from None
        parsed.append((metric, target, value, tolerance))
    return parsed


def _cmd_compare(args: argparse.Namespace) -> int:
    overrides = _collect_overrides(args)
    params = _merge_params(_PARAM_DEFAULTS, overrides)
    # Validate the full command line before touching any files so a
    # usage error never leaves partial reports behind.
    expectations = _parse_expectations(args.expect)
    vanilla_rows = _relabeled_rows(args.vanilla, Mode.VANILLA)
    get_aid_rows = _relabeled_rows(args.get_aid, Mode.GET_AID)
    vanilla_configs = {r.config for r in vanilla_rows}
    get_aid_configs = {r.config for r in get_aid_rows}
    if vanilla_configs != get_aid_configs:
        only_vanilla = sorted(vanilla_configs - get_aid_configs)
        only_get_aid = sorted(get_aid_configs - vanilla_configs)
        raise ManifestMismatch(
            "result sets cover different configurations: "
            f"only in vanilla: {only_vanilla or '-'}; "
            f"only in get_aid: {only_get_aid or '-'}"
        )
    report = build_report(vanilla_rows + get_aid_rows, params)
    _write_report(report, _resolve_output(args.output, "comparison"))

    failures = []
    for metric, target, value, tolerance in expectations:
        actual = _expect_value(report, metric, target)
        if actual is None:
            failures.append(
                f"{metric} {target}: no value (relative delta undefined at zero baseline)"
            )
        elif abs(actual - value) > tolerance:
            failures.append(
                f"{metric} {target}: expected {value} +/- {tolerance}, got {actual:.4f}"
            )
    if failures:
        raise ExpectationFailed("; ".join(failures))
    return EXIT_OK


# ---- fit-ensemble ----------------------------------------------------------------


def _read_vad_file(path: str) -> list[PersonVAD]:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{p}: file does not exist") from None
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, list):
        raise ParseError(f"{p}: expected an array of [valence, arousal, dominance]")
    out = []
    for i, item in enumerate(doc):
        if not isinstance(item, list) or len(item) != 3:
            raise ParseError(f"{p}: item {i} must be an array of three numbers")
        try:
            out.append(PersonVAD(*(float(x) for x in item)))
        except (TypeError, ValueError) as exc:
            raise RangeError(f"{p}[{i}]", item, f"{p}: item {i}: {exc}") from exc
    return out


def _cmd_fit_ensemble(args: argparse.Namespace) -> int:
    if len(args.predictions) < 2:
        raise UsageError("--predictions needs at least two files")
    predictions = [_read_vad_file(path) for path in args.predictions]
    truth = _read_vad_file(args.truth)
    try:
        weights = fit_ensemble_weights(predictions, truth, grid_step=args.grid_step)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    error = mean_error_rate(ensemble_vad(predictions, weights), truth)
    doc = {
        "models": list(args.predictions),
        "grid_step": args.grid_step,
        "weights": list(weights),
        "validation_error": error,
    }
    out_path = _resolve_output(args.output, "ensemble_weights.json")
    atomic_write_text(out_path, json.dumps(doc, indent=2) + "\n")
    print(
        "weights: "
        + ", ".join(f"{w:.2f}" for w in weights)
        + f" (validation error {error:.4f}) -> {out_path}",
        file=sys.stderr,
    )
    return EXIT_OK


# ---- synth -----------------------------------------------------------------------


def _cmd_synth(args: argparse.Namespace) -> int:
    overrides = _collect_overrides(args)
    params = _merge_params(_PARAM_DEFAULTS, overrides)
    if args.count < 1:
        raise UsageError(f"--count must be at least 1, got {args.count}")
    try:
        spec = GenerationSpec(
            person_count=(args.person_min, args.person_max),
            vad_bounds=(args.vad_low, args.vad_high),
            score_bounds=(args.score_low, args.score_high),
            truth_rule=args.truth_rule,
            params=params,
        )
    except InvalidSpec as exc:
        raise UsageError(str(exc)) from exc

    out_dir = _resolve_output(args.output, args.name)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(args.count):
        annotations = synthesize_case(args.seed + i, spec)
        sidecar = out_dir / f"{annotations.image_id}.json"
        save_annotations(annotations, sidecar)
        entries.append(
            ManifestEntry(
                image_id=annotations.image_id,
                sidecar=sidecar,
                ground_truth=annotations.ground_truth,
            )
        )
        if (i + 1) % _PROGRESS_EVERY == 0:
            print(f"generated {i + 1}/{args.count} images", file=sys.stderr)
    manifest = DatasetManifest(
        name=args.name,
        task=Task(args.task),
        params=params,
        entries=tuple(entries),
    )
    save_manifest(manifest, out_dir / "manifest.json")
    print(
        f"wrote {args.count} sidecars and manifest.json to {out_dir}",
        file=sys.stderr,
    )
    return EXIT_OK
