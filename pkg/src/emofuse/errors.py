"""Exception hierarchy for the fusion engine.

Everything raised deliberately by this package derives from
:class:`EmofuseError`, so callers can catch a single type at the
boundary.  Subclasses mirror the failure surfaces of the individual
modules: score validation, annotation loading, metric computation and
report comparison.
"""

from __future__ import annotations


class EmofuseError(Exception):
    """Base class for all errors raised by this package."""


# ---- score and domain-type validation ----------------------------------


class NonFiniteScore(EmofuseError):
    """A classifier score is NaN or infinite."""


class NotAProbabilityPair(EmofuseError):
    """A score pair has values outside [0, 1] or does not sum to one."""


class NoPersons(EmofuseError):
    """Global emotional traits were requested for an empty person list."""


class MisalignedAnnotations(EmofuseError):
    """Per-person emotion estimates do not line up with the filtered detections."""


# ---- annotation and manifest I/O ----------------------------------------


class ParseError(EmofuseError):
    """A manifest or sidecar file is structurally malformed."""


class DuplicateImageId(EmofuseError):
    """A manifest lists the same image id more than once."""


class MissingSidecar(EmofuseError):
    """A manifest references a sidecar file that does not exist."""


class RangeError(EmofuseError):
    """A field in an annotation file is outside its legal range."""

    def __init__(self, field: str, value: object, message: str | None = None):
        self.field = field
        self.value = value
        super().__init__(message or f"{field}={value!r} is out of range")


class InvalidSpec(EmofuseError):
    """A synthetic-corpus generation spec is inconsistent."""


# ---- metrics and reporting -----------------------------------------------


class LengthMismatch(EmofuseError):
    """Two sequences that must be aligned have different lengths."""


class EmptySet(EmofuseError):
    """A metric was requested over zero samples."""


class WeightsNotNormalized(EmofuseError):
    """Ensemble weights are negative or do not sum to one."""


class MissingMode(EmofuseError):
    """A configuration is missing one of the two run modes."""


class MissingGroundTruth(EmofuseError):
    """Evaluation requires ground truth for every manifest entry."""


class ManifestMismatch(EmofuseError):
    """Two result sets do not describe the same set of configurations."""


class ExpectationFailed(EmofuseError):
    """An --expect assertion on a comparison report was violated."""
