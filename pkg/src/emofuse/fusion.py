"""Trait-driven score adjustment and per-image inference.

The adjustment rule shifts probability mass between the two outcomes
according to how far the image's mean valence and mean dominance sit
from a neutral zone.  Dimensions apply sequentially (valence first,
then dominance on the already-shifted pair), each shift is capped so
no score leaves [0, 1], and the pair keeps summing to one.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from .core import (
    VAD_MAX,
    VAD_MIN,
    BinaryScores,
    Decision,
    Detection,
    FusionParams,
    GlobalEmotionalTraits,
    PersonVAD,
)
from .errors import MisalignedAnnotations
from .traits import compute_get, filter_persons


class Dimension(str, Enum):
    """Emotional dimension a single adjustment step responds to."""

    VALENCE = "valence"
    DOMINANCE = "dominance"


@dataclass(frozen=True, slots=True)
class AdjustmentTrace:
    """Record of one dimension's effect on the score pair.

    ``delta_from_neutral`` is how far the trait value sat outside the
    neutral zone (zero inside it), ``applied_adjustment`` the mass that
    actually moved, and ``capped`` whether the move was truncated to
    keep the shrinking score at zero.
    """

    dimension: Dimension
    delta_from_neutral: float
    applied_adjustment: float
    capped: bool

    def __post_init__(self) -> None:
        if self.delta_from_neutral < 0.0:
            raise ValueError(
                f"delta_from_neutral must be non-negative, got {self.delta_from_neutral}"
            )
        if self.applied_adjustment < 0.0:
            raise ValueError(
                f"applied_adjustment must be non-negative, got {self.applied_adjustment}"
            )


def adjust_for_dimension(
    scores: BinaryScores,
    d: float,
    params: FusionParams,
    dimension: Dimension = Dimension.VALENCE,
) -> tuple[BinaryScores, AdjustmentTrace]:
    """Shift the score pair according to one trait dimension.

    Values inside the neutral zone (bounds inclusive) change nothing
    and return the input pair unchanged.  Above the zone the image
    reads as positive/controlled, so mass moves from the violation
    score to the no-violation score; below the zone the reverse.  The
    shift is ``distance-from-zone * adjust_factor``, truncated so the
    shrinking score stops exactly at zero (its complement then lands
    exactly at one).

    Parameters
    ----------
    scores:
        Pair to adjust; never mutated.
    d:
        Trait value on the [1, 10] scale.
    params:
        Zone bounds and adjustment factor.
    dimension:
        Which dimension this step represents, recorded in the trace.

    Returns
    -------
    (BinaryScores, AdjustmentTrace)
        The adjusted pair and a record of what moved.
    """
    if not (VAD_MIN <= d <= VAD_MAX):
        raise ValueError(f"trait value must lie in [{VAD_MIN}, {VAD_MAX}], got {d}")

    if params.neutral_low <= d <= params.neutral_high:
        trace = AdjustmentTrace(dimension, 0.0, 0.0, False)
        return scores, trace

    if d > params.neutral_high:
        delta = d - params.neutral_high
        requested = delta * params.adjust_factor
        applied = min(requested, scores.s_violation)
        shrunk = scores.s_violation - applied
        adjusted = BinaryScores(shrunk, 1.0 - shrunk)
    else:
        delta = params.neutral_low - d
        requested = delta * params.adjust_factor
        applied = min(requested, scores.s_no_violation)
        shrunk = scores.s_no_violation - applied
        adjusted = BinaryScores(1.0 - shrunk, shrunk)

    trace = AdjustmentTrace(dimension, delta, applied, applied < requested)
    return adjusted, trace


def apply_get_adjustment(
    scores: BinaryScores,
    get: GlobalEmotionalTraits,
    params: FusionParams,
) -> tuple[BinaryScores, list[AdjustmentTrace]]:
    """Adjust a score pair for both trait dimensions in order.

    Valence applies first, then dominance on the shifted pair.  The
    traces come back in application order.
    """
    after_valence, valence_trace = adjust_for_dimension(
        scores, get.d1_valence, params, Dimension.VALENCE
    )
    adjusted, dominance_trace = adjust_for_dimension(
        after_valence, get.d2_dominance, params, Dimension.DOMINANCE
    )
    return adjusted, [valence_trace, dominance_trace]


def infer_image_traced(
    raw: BinaryScores,
    detections: Sequence[Detection],
    vads: Sequence[PersonVAD],
    params: FusionParams,
) -> tuple[Decision, list[AdjustmentTrace]]:
    """Full per-image pipeline, also returning the adjustment traces.

    ``vads`` must be aligned one-to-one with the detections that pass
    the person filter under ``params``.  When no person passes, the
    raw scores flow through untouched and the decision carries no
    trait summary.

    Raises
    ------
    MisalignedAnnotations
        If ``vads`` and the filtered person list differ in length.
    """
    persons = filter_persons(detections, params)
    if len(vads) != len(persons):
        raise MisalignedAnnotations(
            f"got {len(vads)} per-person annotations for "
            f"{len(persons)} filtered person detections"
        )
    if not persons:
        return Decision.from_scores(raw, params, get=None), []
    get = compute_get(vads)
    adjusted, traces = apply_get_adjustment(raw, get, params)
    return Decision.from_scores(adjusted, params, get=get), traces


def infer_image(
    raw: BinaryScores,
    detections: Sequence[Detection],
    vads: Sequence[PersonVAD],
    params: FusionParams,
) -> Decision:
    """Decide one image from raw scores plus its person annotations."""
    decision, _ = infer_image_traced(raw, detections, vads, params)
    return decision
