"""Online allocation rules.

Each rule sees only the organ that has just arrived and the patients waiting
at that moment, and returns the id of one waiting patient or None (the organ
is then wasted). Ties are always broken by (arrival_day, id).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .population import Organ, Patient

MECHANISM_NAMES = ("fifo", "greedy", "rank", "random")


@dataclass(frozen=True)
class WaitlistState:
    """Unmatched patients who have arrived, in (arrival_day, id) order."""

    waiting: Sequence[Patient]
    current_day: int


def fifo_assign(organ: Organ, state: WaitlistState, rng=None) -> Optional[str]:
    """Longest-waiting patient; scores are ignored."""
    if not state.waiting:
        return None
    return min(state.waiting, key=lambda p: (p.arrival_day, p.id)).id


def greedy_assign(organ: Organ, state: WaitlistState, rng=None) -> Optional[str]:
    """Patient whose EPTS is closest to the organ's KDPI."""
    if not state.waiting:
        return None
    k = organ.kdpi
    return min(state.waiting, key=lambda p: (abs(k - p.epts), p.arrival_day, p.id)).id


def rank_index(kdpi: int, n: int) -> int:
    """round-half-up(kdpi / 100 * (n - 1)) in integer arithmetic."""
    return (2 * kdpi * (n - 1) + 100) // 200


def rank_assign(organ: Organ, state: WaitlistState, rng=None) -> Optional[str]:
    """Map the organ's KDPI percentile onto the EPTS-ranked waitlist."""
    n = len(state.waiting)
    if n == 0:
        return None
    ranked = sorted(state.waiting, key=lambda p: (p.epts, p.arrival_day, p.id))
    return ranked[rank_index(organ.kdpi, n)].id


def random_assign(organ: Organ, state: WaitlistState, rng: np.random.Generator) -> Optional[str]:
    """Uniform choice; consumes one `rng.integers` draw iff the waitlist is non-empty."""
    if not state.waiting:
        return None
    ordered = sorted(state.waiting, key=lambda p: (p.arrival_day, p.id))
    return ordered[int(rng.integers(len(ordered)))].id


Mechanism = Callable[[Organ, WaitlistState, Optional[np.random.Generator]], Optional[str]]

MECHANISMS: dict[str, Mechanism] = {
    "fifo": fifo_assign,
    "greedy": greedy_assign,
    "rank": rank_assign,
    "random": random_assign,
}


class UnknownMechanismError(ValueError):
    pass


def get_mechanism(name: str) -> Mechanism:
    try:
        return MECHANISMS[name]
    except KeyError:
        raise UnknownMechanismError(
            f"unknown mechanism {name!r}; valid names: {', '.join(MECHANISM_NAMES)}"
        ) from None
