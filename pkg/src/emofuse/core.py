"""Core value types and shared numeric conventions.

Every type here is an immutable value: it validates itself on
construction and can be shared freely between workers.  Downstream
modules never mutate scores in place; each adjustment step returns a
fresh :class:`BinaryScores`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import NonFiniteScore, NotAProbabilityPair

# Raw classifier pairs may drift from summing to exactly one at rounding
# scale; anything inside INPUT_SUM_TOLERANCE is repaired by
# renormalisation, anything outside is rejected.  Internally constructed
# pairs must hold the tighter INTERNAL_SUM_TOLERANCE.
INPUT_SUM_TOLERANCE = 1e-6
INTERNAL_SUM_TOLERANCE = 1e-9

# Continuous emotional-dimension scale shared by all VAD values.
VAD_MIN = 1.0
VAD_MAX = 10.0


class Label(str, Enum):
    """Binary decision label for one image."""

    VIOLATION = "violation"
    NO_VIOLATION = "no_violation"


class Mode(str, Enum):
    """How a decision was produced: raw classifier or trait-adjusted."""

    VANILLA = "vanilla"
    GET_AID = "get_aid"


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Axis-aligned pixel box with strictly positive extent."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        for name in ("x_min", "y_min", "x_max", "y_max"):
            value = getattr(self, name)
            _require_finite(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if not (self.x_min < self.x_max):
            raise ValueError(f"x_min must be < x_max, got [{self.x_min}, {self.x_max}]")
        if not (self.y_min < self.y_max):
            raise ValueError(f"y_min must be < y_max, got [{self.y_min}, {self.y_max}]")


@dataclass(frozen=True, slots=True)
class Detection:
    """One detector output: a labelled box with confidence in [0, 1]."""

    box: BoundingBox
    class_label: str
    confidence: float

    def __post_init__(self) -> None:
        if not self.class_label:
            raise ValueError("class_label must be non-empty")
        _require_finite("confidence", self.confidence)
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")


@dataclass(frozen=True, slots=True)
class PersonVAD:
    """Continuous emotional state of one detected person.

    All three dimensions live on the shared [1, 10] scale: valence is
    how positive the person appears, arousal how agitated, dominance
    how much in control of the situation.
    """

    valence: float
    arousal: float
    dominance: float

    def __post_init__(self) -> None:
        for name in ("valence", "arousal", "dominance"):
            value = getattr(self, name)
            _require_finite(name, value)
            if not (VAD_MIN <= value <= VAD_MAX):
                raise ValueError(
                    f"{name} must lie in [{VAD_MIN}, {VAD_MAX}], got {value}"
                )


@dataclass(frozen=True, slots=True)
class GlobalEmotionalTraits:
    """Image-level emotion summary over all contributing persons.

    Carries the mean valence and the mean dominance only.  Arousal is
    deliberately left out of the summary: agitation does not separate
    the two decision outcomes.  Only defined for images with at least
    one contributing person; the no-person fallback never constructs
    this type.
    """

    d1_valence: float
    d2_dominance: float
    person_count: int

    def __post_init__(self) -> None:
        if self.person_count < 1:
            raise ValueError(
                f"person_count must be at least 1, got {self.person_count}"
            )
        for name in ("d1_valence", "d2_dominance"):
            value = getattr(self, name)
            _require_finite(name, value)
            if not (VAD_MIN <= value <= VAD_MAX):
                raise ValueError(
                    f"{name} must lie in [{VAD_MIN}, {VAD_MAX}], got {value}"
                )


@dataclass(frozen=True, slots=True)
class BinaryScores:
    """Probability pair over the two decision outcomes.

    Both values lie in [0, 1] and sum to one within
    INTERNAL_SUM_TOLERANCE.  Use :func:`validate_scores` to build one
    from untrusted input.
    """

    s_violation: float
    s_no_violation: float

    def __post_init__(self) -> None:
        for name in ("s_violation", "s_no_violation"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise NonFiniteScore(f"{name} must be finite, got {value!r}")
            if not (0.0 <= value <= 1.0):
                raise NotAProbabilityPair(
                    f"{name} must lie in [0, 1], got {value}"
                )
        total = self.s_violation + self.s_no_violation
        if abs(total - 1.0) > INTERNAL_SUM_TOLERANCE:
            raise NotAProbabilityPair(
                f"scores must sum to 1 within {INTERNAL_SUM_TOLERANCE}, got {total!r}"
            )

    @property
    def max_score(self) -> float:
        return max(self.s_violation, self.s_no_violation)

    @property
    def winning_label(self) -> Label:
        # Ties resolve to no_violation: a violation call needs a strict margin.
        if self.s_violation > self.s_no_violation:
            return Label.VIOLATION
        return Label.NO_VIOLATION


@dataclass(frozen=True, slots=True)
class FusionParams:
    """Tunable knobs of the adjustment and decision pipeline.

    adjust_factor
        Probability mass shifted per unit of distance from the neutral
        zone.  Zero disables the adjustment entirely.
    neutral_low, neutral_high
        Inclusive bounds of the neutral zone on the [1, 10] scale;
        trait values inside it leave scores untouched.
    detection_threshold
        Persons at or below this detector confidence are ignored.
    coverage_threshold
        Minimum winning score for a decision to count as covered.
    """

    adjust_factor: float = 0.11
    neutral_low: float = 4.5
    neutral_high: float = 5.5
    detection_threshold: float = 0.5
    coverage_threshold: float = 0.75

    def __post_init__(self) -> None:
        for name in (
            "adjust_factor",
            "neutral_low",
            "neutral_high",
            "detection_threshold",
            "coverage_threshold",
        ):
            _require_finite(name, getattr(self, name))
        if self.adjust_factor < 0.0:
            raise ValueError(
                f"adjust_factor must be non-negative, got {self.adjust_factor}"
            )
        if not (VAD_MIN <= self.neutral_low < self.neutral_high <= VAD_MAX):
            raise ValueError(
                "neutral zone must satisfy "
                f"{VAD_MIN} <= low < high <= {VAD_MAX}, "
                f"got [{self.neutral_low}, {self.neutral_high}]"
            )
        for name in ("detection_threshold", "coverage_threshold"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True, slots=True)
class Decision:
    """Final call for one image: label, scores, optional trait summary."""

    label: Label
    scores: BinaryScores
    get: GlobalEmotionalTraits | None
    covered: bool

    @classmethod
    def from_scores(
        cls,
        scores: BinaryScores,
        params: FusionParams,
        get: GlobalEmotionalTraits | None = None,
    ) -> "Decision":
        """Derive label and coverage from a score pair.

        The label goes to violation only on a strict majority; the
        decision is covered when the winning score reaches the
        coverage threshold (inclusive).
        """
        return cls(
            label=scores.winning_label,
            scores=scores,
            get=get,
            covered=scores.max_score >= params.coverage_threshold,
        )


def validate_scores(violation: float, no_violation: float) -> BinaryScores:
    """Check and repair a raw classifier score pair.

    Parameters
    ----------
    violation, no_violation:
        Scores as read from a classifier or a sidecar file.

    Returns
    -------
    BinaryScores
        The pair renormalised to sum to exactly one.  Values may drift
        from a clean probability pair at rounding scale only; genuine
        range or sum violations raise instead of being clamped.

    Raises
    ------
    NonFiniteScore
        If either value is NaN or infinite.
    NotAProbabilityPair
        If either value is materially outside [0, 1] or the sum is
        further than INPUT_SUM_TOLERANCE from one.
    """
    for name, value in (("violation", violation), ("no_violation", no_violation)):
        if not math.isfinite(value):
            raise NonFiniteScore(f"{name} must be finite, got {value!r}")
    total = violation + no_violation
    if abs(total - 1.0) > INPUT_SUM_TOLERANCE:
        raise NotAProbabilityPair(
            f"scores must sum to 1 within {INPUT_SUM_TOLERANCE}, "
            f"got {violation!r} + {no_violation!r} = {total!r}"
        )
    for name, value in (("violation", violation), ("no_violation", no_violation)):
        if value < -INTERNAL_SUM_TOLERANCE or value > 1.0 + INTERNAL_SUM_TOLERANCE:
            raise NotAProbabilityPair(f"{name} must lie in [0, 1], got {value!r}")
    # Renormalise, then snap into [0, 1] so the complement is exact.
    repaired = min(max(violation / total, 0.0), 1.0)
    return BinaryScores(repaired, 1.0 - repaired)
