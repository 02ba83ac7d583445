"""Raw donor/recipient risk and cohort percentile scores (KDPI, EPTS).

The raw risk is a linear function of the profile; the published score is the
floor of the percentage of a reference cohort whose risk is strictly lower.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_AGE = 130.0


@dataclass(frozen=True)
class DonorProfile:
    age: float
    diabetic: bool = False

    def __post_init__(self):
        if not 0 <= self.age <= MAX_AGE:
            raise ValueError(f"donor age {self.age} outside [0, {MAX_AGE}]")


@dataclass(frozen=True)
class RecipientProfile:
    age: float
    diabetic: bool = False
    dialysis_years: float = 0.0

    def __post_init__(self):
        if not 0 <= self.age <= MAX_AGE:
            raise ValueError(f"recipient age {self.age} outside [0, {MAX_AGE}]")
        if self.dialysis_years < 0:
            raise ValueError(f"negative dialysis_years {self.dialysis_years}")


@dataclass(frozen=True)
class ScoringWeights:
    """Weights of the linear raw-risk formulas. Age always carries weight 1."""

    donor_diabetic: float = 20.0
    recipient_diabetic: float = 20.0
    recipient_dialysis_year: float = 2.0

    def __post_init__(self):
        # non-negative weights keep risk monotone in every field
        for name in ("donor_diabetic", "recipient_diabetic", "recipient_dialysis_year"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be non-negative")


DEFAULT_WEIGHTS = ScoringWeights()


class EmptyCohortError(ValueError):
    """Raised when a percentile is requested against no reference population."""


def raw_donor_risk(profile: DonorProfile, weights: ScoringWeights = DEFAULT_WEIGHTS) -> float:
    return float(profile.age) + weights.donor_diabetic * profile.diabetic


def raw_recipient_risk(
    profile: RecipientProfile, weights: ScoringWeights = DEFAULT_WEIGHTS
) -> float:
    return (
        float(profile.age)
        + weights.recipient_diabetic * profile.diabetic
        + weights.recipient_dialysis_year * profile.dialysis_years
    )


def percentile_score(value: float, cohort: Sequence[float]) -> int:
    """Integer score in [0, 100]: floor(100 * #{c < value} / len(cohort))."""
    if len(cohort) == 0:
        raise EmptyCohortError("cohort is empty: no reference population")
    below = sum(1 for c in cohort if c < value)
    return (100 * below) // len(cohort)


def percentile_scores(values: Iterable[float], cohort: Sequence[float]) -> list[int]:
    """Vectorised `percentile_score` for many values against one cohort."""
    if len(cohort) == 0:
        raise EmptyCohortError("cohort is empty: no reference population")
    ordered = sorted(cohort)
    n = len(ordered)
    return [(100 * bisect_left(ordered, v)) // n for v in values]


def kdpi_scores(
    donors: Sequence[DonorProfile], weights: ScoringWeights = DEFAULT_WEIGHTS
) -> list[int]:
    """KDPI for each donor, using the donors themselves as reference cohort."""
    risks = [raw_donor_risk(d, weights) for d in donors]
    return percentile_scores(risks, risks) if risks else []


def epts_scores(
    recipients: Sequence[RecipientProfile], weights: ScoringWeights = DEFAULT_WEIGHTS
) -> list[int]:
    risks = [raw_recipient_risk(r, weights) for r in recipients]
    return percentile_scores(risks, risks) if risks else []
