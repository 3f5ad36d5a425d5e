"""Person filtering and global emotional trait aggregation.

An image's emotional summary is built in two steps: keep the detector
outputs that are confidently people, then average their valence and
dominance.  Both steps are pure functions of their inputs.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from .core import Detection, FusionParams, GlobalEmotionalTraits, PersonVAD
from .errors import NoPersons

# Detector class label that contributes to the emotional summary.
# Matching is exact and case-sensitive; "Person" is not a person.
PERSON_LABEL = "person"


def filter_persons(
    detections: Sequence[Detection], params: FusionParams
) -> list[Detection]:
    """Keep detections that are persons above the confidence threshold.

    The threshold comparison is strict: a person at exactly
    ``params.detection_threshold`` is dropped.  Input order is
    preserved, so the result stays aligned with per-person annotation
    lists built against the same filter.
    """
    return [
        d
        for d in detections
        if d.class_label == PERSON_LABEL and d.confidence > params.detection_threshold
    ]


def compute_get(persons: Sequence[PersonVAD]) -> GlobalEmotionalTraits:
    """Average per-person emotions into image-level traits.

    Parameters
    ----------
    persons:
        Emotional states of every person that survived filtering.
        Must be non-empty; images without persons take the fallback
        path and never build a trait summary.

    Returns
    -------
    GlobalEmotionalTraits
        Mean valence and mean dominance over the input, with the
        contributing person count.  Arousal is ignored.

    Raises
    ------
    NoPersons
        If ``persons`` is empty.
    """
    if not persons:
        raise NoPersons("cannot summarise an image with no contributing persons")
    count = len(persons)
    # fsum is correctly rounded, which makes the mean independent of
    # the order persons were detected in.
    mean_valence = math.fsum(p.valence for p in persons) / count
    mean_dominance = math.fsum(p.dominance for p in persons) / count
    # Float summation may drift past the extremes by an ulp; the mean of
    # values in [lo, hi] must stay inside [lo, hi].
    mean_valence = _clamp_to_span(mean_valence, [p.valence for p in persons])
    mean_dominance = _clamp_to_span(mean_dominance, [p.dominance for p in persons])
    return GlobalEmotionalTraits(
        d1_valence=mean_valence,
        d2_dominance=mean_dominance,
        person_count=count,
    )


def _clamp_to_span(value: float, contributions: list[float]) -> float:
    return min(max(value, min(contributions)), max(contributions))


def get_pair_score(get: GlobalEmotionalTraits) -> float:
    """Combined trait score: the product of mean valence and mean dominance.

    Exposed for inspection and ranking experiments; the decision
    pipeline itself adjusts scores from the two dimensions separately
    and never consumes this product.
    """
    return get.d1_valence * get.d2_dominance
