"""JSON reports: stable key order, exact rationals as "p/q" strings.

Every rational field `x` is accompanied by `x_decimal`, a float rounded to six
places that is for human eyes only; the "p/q" string is authoritative.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .offline import Allocation
from .population import Instance
from .simulator import INFINITY, Metrics, Trace, Infinity, ORGAN_ARRIVAL, competitive_ratio

SCHEMA_VERSION = "1"


def render_rational(x) -> Optional[str]:
    if x is None:
        return None
    if isinstance(x, Infinity):
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: Optional[str]):
    if s is None:
        return None
    if s == "inf":
        return INFINITY
    return Fraction(s)


def _decimal(x) -> Optional[float]:
    if x is None or isinstance(x, Infinity):
        return None
    return round(float(x), 6)


def histogram(scores, bins: int = 10) -> list[int]:
    """Counts per score decile; 100 falls in the last bin."""
    counts = [0] * bins
    for s in scores:
        counts[min(s * bins // 100, bins - 1)] += 1
    return counts


def instance_summary(instance: Instance) -> dict:
    return {
        "patients": len(instance.patients),
        "organs": len(instance.organs),
        "epts_histogram": histogram(p.epts for p in instance.patients),
        "kdpi_histogram": histogram(o.kdpi for o in instance.organs),
    }


def metrics_dict(m: Metrics) -> dict:
    out = {
        "total_cost": m.total_cost,
        "matched_count": m.matched_count,
        "wasted_count": m.wasted_count,
        "max_abs_diff": m.max_abs_diff,
    }
    for name in ("mean_abs_diff", "mean_wait_days", "competitive_ratio"):
        value = getattr(m, name)
        out[name] = render_rational(value)
        out[name + "_decimal"] = _decimal(value)
    return out


def allocation_dict(a: Allocation) -> dict:
    return {
        "matched_count": a.matched_count,
        "total_cost": a.total_cost,
        "pairs": [
            {"organ": o, "patient": p, "cost": c} for (o, p), c in zip(a.pairs, a.costs)
        ],
    }


def decision_records(trace: Trace, instance: Instance) -> list[dict]:
    kdpi = {o.id: o.kdpi for o in instance.organs}
    epts = {p.id: p.epts for p in instance.patients}
    records = []
    for e in trace.events:
        if e.kind != ORGAN_ARRIVAL:
            continue
        records.append({
            "day": e.day,
            "organ": e.subject,
            "kdpi": kdpi[e.subject],
            "patient": e.decision,
            "epts": epts[e.decision] if e.decision is not None else None,
            "cost": e.cost,
            "wait_days": e.wait_days,
        })
    return records


def run_report(instance, mechanism, seed, trace, metrics, offline) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "run",
        "mechanism": mechanism,
        "seed": seed,
        "instance": instance_summary(instance),
        "metrics": metrics_dict(metrics),
        "offline": allocation_dict(offline),
        "decisions": decision_records(trace, instance),
    }


def recompute_metrics(report: dict) -> dict:
    """Rebuild the `metrics` block of a run report from its decision records."""
    decided = [d for d in report["decisions"] if d["patient"] is not None]
    n = len(decided)
    total = sum(d["cost"] for d in decided)
    online = Allocation(tuple((d["organ"], d["patient"]) for d in decided),
                        tuple(d["cost"] for d in decided))
    off = report["offline"]
    offline = Allocation(tuple((p["organ"], p["patient"]) for p in off["pairs"]),
                         tuple(p["cost"] for p in off["pairs"]))
    m = Metrics(
        total_cost=total,
        matched_count=n,
        wasted_count=len(report["decisions"]) - n,
        mean_abs_diff=Fraction(total, n) if n else None,
        max_abs_diff=max(d["cost"] for d in decided) if n else None,
        mean_wait_days=Fraction(sum(d["wait_days"] for d in decided), n) if n else None,
        competitive_ratio=competitive_ratio(online, offline),
        offline_matched_count=offline.matched_count,
        offline_total_cost=offline.total_cost,
    )
    return metrics_dict(m)


def dumps(report: Any) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def write_report(report: Any, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report))
