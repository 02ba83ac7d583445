"""Exhaustive efficiency and manipulability checks on small instances.

A patient's utility is -|assigned KDPI - true EPTS| when matched and
UNMATCHED_UTILITY (worse than any match) otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .offline import Allocation, BRUTE_FORCE_LIMIT, OracleSizeError, check_allocation
from .population import Instance
from .simulator import run_simulation

UNMATCHED_UTILITY = -101
REPORT_RANGE = range(0, 101)


@dataclass(frozen=True)
class MisreportFinding:
    patient_id: str
    true_epts: int
    reported_epts: int
    truthful_kdpi: Optional[int]
    misreport_kdpi: Optional[int]
    utility_gain: int


def utility(assigned_kdpi: Optional[int], true_epts: int) -> int:
    if assigned_kdpi is None:
        return UNMATCHED_UTILITY
    return -abs(assigned_kdpi - true_epts)


def _received_kdpi(instance: Instance, mechanism: str, pid: str, seed: int) -> Optional[int]:
    trace = run_simulation(instance, mechanism, seed)
    kdpi = {o.id: o.kdpi for o in instance.organs}
    for oid, p in trace.allocation.pairs:
        if p == pid:
            return kdpi[oid]
    return None


def find_profitable_misreport(
    mechanism: str, instance: Instance, patient_id: str, seed: int = 0
) -> Optional[MisreportFinding]:
    """Lowest EPTS report that strictly raises the patient's true utility, if any."""
    true_epts = instance.patient(patient_id).epts  # KeyError for unknown ids
    truthful = _received_kdpi(instance, mechanism, patient_id, seed)
    base = utility(truthful, true_epts)
    for report in REPORT_RANGE:
        if report == true_epts:
            continue
        got = _received_kdpi(instance.with_epts(patient_id, report), mechanism, patient_id, seed)
        gain = utility(got, true_epts) - base
        if gain > 0:
            return MisreportFinding(patient_id, true_epts, report, truthful, got, gain)
    return None


def check_pairwise_swap_optimality(allocation: Allocation, instance: Instance) -> bool:
    """True iff no feasible exchange of two matched patients lowers total cost."""
    check_allocation(allocation, instance)
    organs = {o.id: o for o in instance.organs}
    patients = {p.id: p for p in instance.patients}
    pairs = [(organs[o], patients[p]) for o, p in allocation.pairs]
    for i, (o1, p1) in enumerate(pairs):
        for o2, p2 in pairs[i + 1:]:
            if p1.arrival_day > o2.arrival_day or p2.arrival_day > o1.arrival_day:
                continue
            before = abs(o1.kdpi - p1.epts) + abs(o2.kdpi - p2.epts)
            after = abs(o1.kdpi - p2.epts) + abs(o2.kdpi - p1.epts)
            if after < before:
                return False
    return True


def _utility_vectors(instance: Instance):
    """Yield the utility vector (patient order) of every feasible allocation."""
    patients = instance.patients
    organs = instance.organs
    opts = [
        [(j, -abs(o.kdpi - p.epts)) for j, p in enumerate(patients) if p.arrival_day <= o.arrival_day]
        for o in organs
    ]
    util = [UNMATCHED_UTILITY] * len(patients)

    def visit(i):
        if i == len(organs):
            yield tuple(util)
            return
        yield from visit(i + 1)
        for j, u in opts[i]:
            if util[j] == UNMATCHED_UTILITY:
                util[j] = u
                yield from visit(i + 1)
                util[j] = UNMATCHED_UTILITY

    yield from visit(0)


def check_pareto_efficiency(allocation: Allocation, instance: Instance) -> bool:
    """True iff no feasible allocation weakly improves every patient and strictly one."""
    if min(len(instance.organs), len(instance.patients)) > BRUTE_FORCE_LIMIT:
        raise OracleSizeError(
            f"Pareto check needs min(|organs|, |patients|) <= {BRUTE_FORCE_LIMIT}"
        )
    check_allocation(allocation, instance)
    received = {p: o for o, p in allocation.pairs}
    kdpi = {o.id: o.kdpi for o in instance.organs}
    current = tuple(
        utility(kdpi[received[p.id]] if p.id in received else None, p.epts)
        for p in instance.patients
    )
    for other in _utility_vectors(instance):
        if other != current and all(a >= b for a, b in zip(other, current)):
            return False
    return True
