"""Replay an instance's arrivals through an online mechanism."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .mechanisms import WaitlistState, get_mechanism
from .offline import Allocation
from .population import Instance

PATIENT_ARRIVAL = "patient_arrival"
ORGAN_ARRIVAL = "organ_arrival"
_KIND_ORDER = {PATIENT_ARRIVAL: 0, ORGAN_ARRIVAL: 1}


class Infinity:
    """Marker for an unbounded competitive ratio."""

    def __repr__(self):
        return "INFINITY"

    def __eq__(self, other):
        return isinstance(other, Infinity)

    def __hash__(self):
        return hash("organmatch.INFINITY")


INFINITY = Infinity()


@dataclass(frozen=True)
class Event:
    day: int
    kind: str
    subject: str
    decision: Optional[str] = None
    cost: Optional[int] = None
    wait_days: Optional[int] = None


@dataclass(frozen=True)
class Trace:
    events: tuple[Event, ...]
    allocation: Allocation
    wasted_organs: tuple[str, ...]


def derive_stream(seed: int, label: str) -> np.random.Generator:
    """Independent reproducible stream for (master seed, run label).

    The Philox key is the master seed; the counter's high word is the CRC32 of
    the label, so distinct labels walk disjoint counter ranges.
    """
    counter = np.zeros(4, dtype=np.uint64)
    counter[3] = zlib.crc32(label.encode("utf-8"))
    return np.random.Generator(np.random.Philox(key=seed & (2**64 - 1), counter=counter))


def _event_order(instance: Instance):
    items = [(p.arrival_day, 0, p.id, p) for p in instance.patients]
    items += [(o.arrival_day, 1, o.id, o) for o in instance.organs]
    items.sort(key=lambda t: t[:3])
    return items


def run_simulation(instance: Instance, mechanism: str, seed: int = 0) -> Trace:
    """Process arrivals day by day; patients before organs, ascending id within a kind."""
    assign = get_mechanism(mechanism)
    rng = derive_stream(seed, mechanism) if mechanism == "random" else None
    waiting: list = []  # kept in (arrival_day, id) order
    by_id = {}
    events = []
    pairs = []
    wasted = []
    for day, kind, ident, subject in _event_order(instance):
        if kind == 0:
            waiting.append(subject)
            by_id[ident] = subject
            events.append(Event(day, PATIENT_ARRIVAL, ident))
            continue
        choice = assign(subject, WaitlistState(waiting, day), rng)
        if choice is None:
            wasted.append(ident)
            events.append(Event(day, ORGAN_ARRIVAL, ident))
            continue
        patient = by_id.pop(choice)
        waiting.remove(patient)
        cost = abs(subject.kdpi - patient.epts)
        pairs.append((ident, choice))
        events.append(Event(day, ORGAN_ARRIVAL, ident, choice, cost, day - patient.arrival_day))
    return Trace(tuple(events), Allocation.from_pairs(pairs, instance), tuple(wasted))


@dataclass(frozen=True)
class Metrics:
    total_cost: int
    matched_count: int
    wasted_count: int
    mean_abs_diff: Optional[Fraction]
    max_abs_diff: Optional[int]
    mean_wait_days: Optional[Fraction]
    competitive_ratio: Union[Fraction, Infinity, None]
    offline_matched_count: int
    offline_total_cost: int


class ProvenanceError(ValueError):
    """Trace and offline allocation do not come from the same instance."""


def competitive_ratio(online: Allocation, offline: Allocation):
    if online.matched_count != offline.matched_count:
        return None
    if offline.total_cost == 0:
        return Fraction(1) if online.total_cost == 0 else INFINITY
    return Fraction(online.total_cost, offline.total_cost)


def compute_metrics(trace: Trace, offline: Allocation) -> Metrics:
    patient_ids = {e.subject for e in trace.events if e.kind == PATIENT_ARRIVAL}
    organ_ids = {e.subject for e in trace.events if e.kind == ORGAN_ARRIVAL}
    for oid, pid in offline.pairs:
        if oid not in organ_ids or pid not in patient_ids:
            raise ProvenanceError(f"offline pair ({oid}, {pid}) is not part of the traced instance")
    decided = [e for e in trace.events if e.decision is not None]
    online = trace.allocation
    n = len(decided)
    total = sum(e.cost for e in decided)
    return Metrics(
        total_cost=total,
        matched_count=n,
        wasted_count=len(trace.wasted_organs),
        mean_abs_diff=Fraction(total, n) if n else None,
        max_abs_diff=max(e.cost for e in decided) if n else None,
        mean_wait_days=Fraction(sum(e.wait_days for e in decided), n) if n else None,
        competitive_ratio=competitive_ratio(online, offline),
        offline_matched_count=offline.matched_count,
        offline_total_cost=offline.total_cost,
    )
