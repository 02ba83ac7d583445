"""Patients, organs and instances: CSV I/O, validation and synthetic scenarios."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, TextIO

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from .scoring import (
    DEFAULT_WEIGHTS,
    DonorProfile,
    RecipientProfile,
    ScoringWeights,
    epts_scores,
    kdpi_scores,
)

ID_PATTERN = re.compile(r"[A-Za-z0-9_-]+")
PATIENT_HEADER = ("id", "arrival_day", "epts")
ORGAN_HEADER = ("id", "arrival_day", "kdpi")


class InstanceError(ValueError):
    """Invalid instance data. `line` is the 1-based CSV line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, order=True)
class Patient:
    id: str
    arrival_day: int
    epts: int

    @property
    def key(self) -> tuple[int, str]:
        return (self.arrival_day, self.id)


@dataclass(frozen=True, order=True)
class Organ:
    id: str
    arrival_day: int
    kdpi: int

    @property
    def key(self) -> tuple[int, str]:
        return (self.arrival_day, self.id)


@dataclass(frozen=True)
class Instance:
    patients: tuple[Patient, ...] = ()
    organs: tuple[Organ, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "patients", tuple(self.patients))
        object.__setattr__(self, "organs", tuple(self.organs))

    def patient(self, pid: str) -> Patient:
        for p in self.patients:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def with_epts(self, pid: str, epts: int) -> "Instance":
        """Copy of the instance with one patient's EPTS replaced."""
        patients = tuple(replace(p, epts=epts) if p.id == pid else p for p in self.patients)
        return Instance(patients, self.organs)


# --- validation -------------------------------------------------------------


def _check_entity(kind: str, ident: str, day: int, score: int, score_name: str, line=None):
    if not isinstance(ident, str) or not ID_PATTERN.fullmatch(ident):
        raise InstanceError(f"{kind} id {ident!r} must match [A-Za-z0-9_-]+", line)
    if day < 0:
        raise InstanceError(f"{kind} {ident}: negative arrival_day {day}", line)
    if not 0 <= score <= 100:
        raise InstanceError(f"{kind} {ident}: {score_name} {score} outside [0, 100]", line)


def _check_unique(ids: Iterable[str], kind: str):
    seen = set()
    for i in ids:
        if i in seen:
            raise InstanceError(f"duplicate {kind} id {i!r}")
        seen.add(i)


def validate_instance(instance: Instance) -> Instance:
    """Check ranges and id uniqueness; return the instance sorted by (arrival_day, id)."""
    for p in instance.patients:
        _check_entity("patient", p.id, p.arrival_day, p.epts, "epts")
    for o in instance.organs:
        _check_entity("organ", o.id, o.arrival_day, o.kdpi, "kdpi")
    _check_unique((p.id for p in instance.patients), "patient")
    _check_unique((o.id for o in instance.organs), "organ")
    patients = tuple(sorted(instance.patients, key=lambda p: p.key))
    organs = tuple(sorted(instance.organs, key=lambda o: o.key))
    if patients == instance.patients and organs == instance.organs:
        return instance
    return Instance(patients, organs)


# --- CSV --------------------------------------------------------------------


def _parse_rows(text: str | TextIO, header: tuple[str, ...], kind: str, score_name: str):
    if not isinstance(text, str):
        text = text.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise InstanceError(f"missing header, expected {','.join(header)}", 1)
    if tuple(c.strip() for c in rows[0]) != header:
        raise InstanceError(
            f"bad header {','.join(rows[0])!r}, expected {','.join(header)!r}", 1
        )
    out = []
    seen: dict[str, int] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise InstanceError(f"expected 3 fields, got {len(row)}", lineno)
        ident = row[0].strip()
        try:
            day, score = int(row[1]), int(row[2])
        except ValueError:
            raise InstanceError(f"non-integer field in {','.join(row)!r}", lineno) from None
        _check_entity(kind, ident, day, score, score_name, lineno)
        if ident in seen:
            raise InstanceError(
                f"duplicate {kind} id {ident!r} (first seen on line {seen[ident]})", lineno
            )
        seen[ident] = lineno
        out.append((ident, day, score))
    return out


def parse_patients(text: str | TextIO) -> list[Patient]:
    return [Patient(*r) for r in _parse_rows(text, PATIENT_HEADER, "patient", "epts")]


def parse_organs(text: str | TextIO) -> list[Organ]:
    return [Organ(*r) for r in _parse_rows(text, ORGAN_HEADER, "organ", "kdpi")]


def patients_to_csv(patients: Iterable[Patient]) -> str:
    lines = [",".join(PATIENT_HEADER)]
    lines += [f"{p.id},{p.arrival_day},{p.epts}" for p in patients]
    return "\n".join(lines) + "\n"


def organs_to_csv(organs: Iterable[Organ]) -> str:
    lines = [",".join(ORGAN_HEADER)]
    lines += [f"{o.id},{o.arrival_day},{o.kdpi}" for o in organs]
    return "\n".join(lines) + "\n"


def load_instance(patients_path, organs_path) -> Instance:
    with open(patients_path, encoding="utf-8") as fh:
        patients = parse_patients(fh)
    with open(organs_path, encoding="utf-8") as fh:
        organs = parse_organs(fh)
    return validate_instance(Instance(patients, organs))


# --- synthetic scenarios ----------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    """Synthetic population parameters.

    Age means are the means of the *clipped* age distribution; the location of
    the underlying normal is solved for so that clipping does not bias them.
    """

    preset: str = "era2014"
    patient_count: int = 500
    organ_count: int = 400
    horizon_days: int = 365
    donor_age_mean: float = 46.0
    donor_age_sd: float = 15.0
    donor_age_min: float = 18.0
    donor_age_max: float = 80.0
    recipient_age_mean: float = 50.0
    recipient_age_sd: float = 13.0
    recipient_age_min: float = 18.0
    recipient_age_max: float = 80.0
    diabetes_prevalence: float = 0.15
    dialysis_years_mean: float = 3.0
    weights: ScoringWeights = field(default=DEFAULT_WEIGHTS)

    def __post_init__(self):
        if self.preset not in PRESETS and self.preset != "custom":
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)} or custom")
        if self.patient_count < 0 or self.organ_count < 0:
            raise ValueError("counts must be non-negative")
        if self.horizon_days < 1:
            raise ValueError("horizon_days must be at least 1")
        if not 0.0 <= self.diabetes_prevalence <= 1.0:
            raise ValueError("diabetes_prevalence must lie in [0, 1]")
        if self.donor_age_sd < 0 or self.recipient_age_sd < 0:
            raise ValueError("age sd must be non-negative")
        if self.dialysis_years_mean < 0:
            raise ValueError("dialysis_years_mean must be non-negative")
        for lo, mean, hi, who in (
            (self.donor_age_min, self.donor_age_mean, self.donor_age_max, "donor"),
            (self.recipient_age_min, self.recipient_age_mean, self.recipient_age_max, "recipient"),
        ):
            if not 0 <= lo <= mean <= hi <= 130:
                raise ValueError(f"{who} ages need 0 <= min <= mean <= max <= 130")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ScenarioConfig":
        params = dict(PRESETS.get(name, {}))
        params.update(overrides)
        return cls(preset=name, **params)


# mean donor age 32 (max 69) in 1989, 46 (max 80) in 2014
PRESETS: dict[str, dict] = {
    "era1989": {"donor_age_mean": 32.0, "donor_age_max": 69.0},
    "era2014": {"donor_age_mean": 46.0, "donor_age_max": 80.0},
}


def clipped_normal_mean(loc: float, sd: float, lo: float, hi: float) -> float:
    """E[clip(N(loc, sd), lo, hi)]."""
    if sd == 0:
        return min(max(loc, lo), hi)
    a, b = (lo - loc) / sd, (hi - loc) / sd
    return (
        lo * norm.cdf(a)
        + hi * norm.sf(b)
        + loc * (norm.cdf(b) - norm.cdf(a))
        + sd * (norm.pdf(a) - norm.pdf(b))
    )


def calibrate_location(mean: float, sd: float, lo: float, hi: float) -> float:
    """Location of N(loc, sd) whose clip to [lo, hi] has the requested mean."""
    if sd == 0 or lo == hi:
        return mean
    if mean <= lo:
        return lo
    if mean >= hi:
        return hi
    span = hi - lo + 10 * sd
    return brentq(lambda m: clipped_normal_mean(m, sd, lo, hi) - mean, lo - span, hi + span)


def _clipped_ages(rng: np.random.Generator, n: int, mean, sd, lo, hi) -> np.ndarray:
    loc = calibrate_location(mean, sd, lo, hi)
    return np.clip(rng.normal(loc, sd, size=n), lo, hi)


def generate_profiles(config: ScenarioConfig, seed: int):
    """Draw donor and recipient profiles plus arrival days.

    Draw order is fixed (donor ages, donor diabetes, recipient ages, recipient
    diabetes, dialysis years, organ days, patient days) so output depends only
    on (config, seed).
    """
    rng = np.random.default_rng(seed)
    c = config
    d_age = _clipped_ages(rng, c.organ_count, c.donor_age_mean, c.donor_age_sd,
                          c.donor_age_min, c.donor_age_max)
    d_diab = rng.random(c.organ_count) < c.diabetes_prevalence
    r_age = _clipped_ages(rng, c.patient_count, c.recipient_age_mean, c.recipient_age_sd,
                          c.recipient_age_min, c.recipient_age_max)
    r_diab = rng.random(c.patient_count) < c.diabetes_prevalence
    dialysis = rng.exponential(c.dialysis_years_mean, c.patient_count) if c.dialysis_years_mean > 0 \
        else np.zeros(c.patient_count)
    organ_days = rng.integers(0, c.horizon_days, size=c.organ_count)
    patient_days = rng.integers(0, c.horizon_days, size=c.patient_count)
    donors = [DonorProfile(float(a), bool(x)) for a, x in zip(d_age, d_diab)]
    recipients = [RecipientProfile(float(a), bool(x), float(y))
                  for a, x, y in zip(r_age, r_diab, dialysis)]
    return donors, recipients, organ_days.tolist(), patient_days.tolist()


def _ids(prefix: str, n: int) -> list[str]:
    width = max(4, len(str(n)))
    return [f"{prefix}{i:0{width}d}" for i in range(1, n + 1)]


def generate_instance(config: ScenarioConfig, seed: int) -> Instance:
    donors, recipients, organ_days, patient_days = generate_profiles(config, seed)
    kdpi = kdpi_scores(donors, config.weights)
    epts = epts_scores(recipients, config.weights)
    organs = [Organ(i, d, k) for i, d, k in zip(_ids("o", len(donors)), organ_days, kdpi)]
    patients = [Patient(i, d, e) for i, d, e in zip(_ids("p", len(recipients)), patient_days, epts)]
    return validate_instance(Instance(patients, organs))
