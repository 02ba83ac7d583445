"""Offline-optimal allocation with full hindsight.

The optimum maximises the number of transplants, then minimises the summed
|KDPI - EPTS|, then picks the lexicographically smallest sorted list of
(organ id, patient id) pairs. A pair is feasible only when the patient has
arrived on or before the organ's arrival day.

`optimal_offline` solves one padded square assignment problem with the
Hungarian method (integer costs, exact) and then walks the tight subgraph of
the optimal duals to select the lexicographic optimum.
`brute_force_offline` enumerates every feasible allocation and exists to
check it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .population import Instance

BRUTE_FORCE_LIMIT = 8


class InfeasibleAllocationError(ValueError):
    pass


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Allocation:
    pairs: tuple[tuple[str, str], ...]  # (organ id, patient id), sorted
    costs: tuple[int, ...]  # aligned with pairs

    @property
    def total_cost(self) -> int:
        return sum(self.costs)

    @property
    def matched_count(self) -> int:
        return len(self.pairs)

    def as_dict(self) -> dict[str, str]:
        return dict(self.pairs)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]], instance: Instance) -> "Allocation":
        kdpi = {o.id: o.kdpi for o in instance.organs}
        epts = {p.id: p.epts for p in instance.patients}
        ordered = tuple(sorted(pairs))
        return cls(ordered, tuple(abs(kdpi[o] - epts[p]) for o, p in ordered))


EMPTY = Allocation((), ())


def check_allocation(allocation: Allocation, instance: Instance) -> None:
    """Raise InfeasibleAllocationError unless the allocation is a feasible matching."""
    organs = {o.id: o for o in instance.organs}
    patients = {p.id: p for p in instance.patients}
    seen_o, seen_p = set(), set()
    if len(allocation.costs) != len(allocation.pairs):
        raise InfeasibleAllocationError("pairs and costs differ in length")
    for (oid, pid), cost in zip(allocation.pairs, allocation.costs):
        if oid not in organs or pid not in patients:
            raise InfeasibleAllocationError(f"pair ({oid}, {pid}) not in instance")
        if oid in seen_o or pid in seen_p:
            raise InfeasibleAllocationError(f"pair ({oid}, {pid}) reuses an organ or patient")
        seen_o.add(oid)
        seen_p.add(pid)
        o, p = organs[oid], patients[pid]
        if p.arrival_day > o.arrival_day:
            raise InfeasibleAllocationError(
                f"patient {pid} arrives day {p.arrival_day} after organ {oid} (day {o.arrival_day})"
            )
        if cost != abs(o.kdpi - p.epts):
            raise InfeasibleAllocationError(f"wrong cost {cost} for pair ({oid}, {pid})")


def hungarian(cost: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Min-cost perfect matching of a square integer matrix.

    Returns (col_of_row, u, v) with u[i] + v[j] <= cost[i, j] everywhere and
    equality on the matching. O(n^3), vectorised over columns.
    """
    n = cost.shape[0]
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    a = np.asarray(cost, dtype=np.int64)
    inf = np.iinfo(np.int64).max // 4
    u = np.zeros(n + 1, dtype=np.int64)
    v = np.zeros(n + 1, dtype=np.int64)
    row_of_col = np.zeros(n + 1, dtype=np.int64)  # 1-based rows, 0 = free
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        row_of_col[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, dtype=np.int64)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = row_of_col[j0]
            cur = a[i0 - 1] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[row_of_col[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if row_of_col[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            row_of_col[j0] = row_of_col[j1]
            j0 = j1
    col_of_row = np.zeros(n, dtype=np.int64)
    col_of_row[row_of_col[1:] - 1] = np.arange(n)
    return col_of_row, u[1:], v[1:]


def _feasibility(instance: Instance) -> tuple[np.ndarray, np.ndarray]:
    o_day = np.array([o.arrival_day for o in instance.organs], dtype=np.int64)
    p_day = np.array([p.arrival_day for p in instance.patients], dtype=np.int64)
    kdpi = np.array([o.kdpi for o in instance.organs], dtype=np.int64)
    epts = np.array([p.epts for p in instance.patients], dtype=np.int64)
    feasible = p_day[None, :] <= o_day[:, None]
    dist = np.abs(kdpi[:, None] - epts[None, :])
    return feasible, dist


def optimal_offline(instance: Instance) -> Allocation:
    organs, patients = instance.organs, instance.patients
    n_o, n_p = len(organs), len(patients)
    if n_o == 0 or n_p == 0:
        return EMPTY
    n = max(n_o, n_p)
    feasible, dist = _feasibility(instance)
    # Leaving a row or column on a filler cell costs more than any total
    # score distance, so the optimum maximises real pairs first.
    filler = 100 * n + 1
    real = np.zeros((n, n), dtype=bool)
    real[:n_o, :n_p] = feasible
    cost = np.full((n, n), filler, dtype=np.int64)
    cost[:n_o, :n_p][feasible] = dist[feasible]

    col_of_row, u, v = hungarian(cost)
    # Every optimal assignment is a perfect matching of the tight subgraph
    # (complementary slackness) and vice versa.
    tight = (cost - u[:, None] - v[None, :]) == 0

    match = [int(c) for c in col_of_row]
    row_of = [0] * n
    for r, c in enumerate(match):
        row_of[c] = r
    allowed = [set(np.flatnonzero(tight[r]).tolist()) for r in range(n)]
    locked_r = [False] * n
    locked_c = [False] * n

    # Real tight edges in (organ id, patient id) order. For equal-size sets the
    # lexicographically smaller sorted list is the one holding the smallest
    # element of the symmetric difference, so greedy inclusion in this order
    # yields the lexicographic optimum.
    candidates = sorted(
        (organs[r].id, patients[c].id, r, c)
        for r, c in zip(*np.nonzero(tight & real))
    )
    chosen = []
    for oid, pid, r, c in candidates:
        r, c = int(r), int(c)
        if locked_r[r] or locked_c[c] or c not in allowed[r]:
            continue
        if match[r] != c and not _reroute(r, c, match, row_of, allowed, locked_r, locked_c):
            allowed[r].discard(c)
            continue
        locked_r[r] = locked_c[c] = True
        chosen.append((oid, pid))
    return Allocation.from_pairs(chosen, instance)


def _reroute(r, c, match, row_of, allowed, locked_r, locked_c) -> bool:
    """Find an alternating cycle through the non-matching edge (r, c) and flip it.

    Row r takes c, freeing r's old column; c's old row must reach that freed
    column along allowed, unlocked edges. BFS over columns, in column order.
    """
    target = match[r]
    start = row_of[c]
    parent: dict[int, int] = {}  # column -> row that claims it
    queue = deque([start])
    seen_rows = {start, r}
    found = False
    while queue and not found:
        x = queue.popleft()
        for y in sorted(allowed[x]):
            if y == c or locked_c[y] or y in parent or y == match[x]:
                continue
            parent[y] = x
            if y == target:
                found = True
                break
            z = row_of[y]
            if z not in seen_rows and not locked_r[z]:
                seen_rows.add(z)
                queue.append(z)
    if not found:
        return False
    y = target
    while True:
        x = parent[y]
        prev = match[x]
        match[x] = y
        row_of[y] = x
        if x == start:
            break
        y = prev
    match[r] = c
    row_of[c] = r
    return True


def brute_force_offline(instance: Instance) -> Allocation:
    """Exhaustive search; refuses when both sides exceed BRUTE_FORCE_LIMIT."""
    organs, patients = instance.organs, instance.patients
    if min(len(organs), len(patients)) > BRUTE_FORCE_LIMIT:
        raise OracleSizeError(
            f"brute force needs min(|organs|, |patients|) <= {BRUTE_FORCE_LIMIT}"
        )
    options = [
        [(abs(o.kdpi - p.epts), p.id) for p in patients if p.arrival_day <= o.arrival_day]
        for o in organs
    ]
    best_key = None
    best_pairs: list = []
    taken: set[str] = set()
    stack: list[tuple[str, str]] = []

    def visit(i: int, cost: int):
        nonlocal best_key, best_pairs
        if i == len(organs):
            key = (-len(stack), cost, sorted(stack))
            if best_key is None or key < best_key:
                best_key, best_pairs = key, list(stack)
            return
        visit(i + 1, cost)
        oid = organs[i].id
        for d, pid in options[i]:
            if pid not in taken:
                taken.add(pid)
                stack.append((oid, pid))
                visit(i + 1, cost + d)
                stack.pop()
                taken.discard(pid)

    visit(0, 0)
    return Allocation.from_pairs(best_pairs, instance)
