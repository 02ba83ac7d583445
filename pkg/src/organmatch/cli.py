"""organmatch command line: generate, run, compare, axioms.

Exit status 0 on success, 1 on bad input files, 2 on usage errors.
Diagnostics go to stderr, controlled by ORGANMATCH_LOG=quiet|info|debug.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .axioms import (
    check_pairwise_swap_optimality,
    check_pareto_efficiency,
    find_profitable_misreport,
)
from .mechanisms import MECHANISM_NAMES
from .offline import BRUTE_FORCE_LIMIT, optimal_offline
from .population import (
    PRESETS,
    InstanceError,
    ScenarioConfig,
    generate_instance,
    load_instance,
    organs_to_csv,
    patients_to_csv,
)
from .report import (
    SCHEMA_VERSION,
    allocation_dict,
    instance_summary,
    metrics_dict,
    render_rational,
    run_report,
    write_report,
)
from .scoring import ScoringWeights
from .simulator import compute_metrics, run_simulation

log = logging.getLogger("organmatch")

LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("ORGANMATCH_LOG", "quiet").lower()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(LOG_LEVELS.get(level, logging.ERROR))
    log.propagate = False


def parse_seeds(tokens: list[str]) -> list[int]:
    """Seeds as a list; `a..b` expands to the inclusive range."""
    seeds = []
    for tok in tokens:
        for part in tok.split(","):
            if not part:
                continue
            if ".." in part:
                lo, hi = part.split("..", 1)
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(part))
    if any(s < 0 or s >= 2**64 for s in seeds):
        raise ValueError("seeds must be unsigned 64-bit integers")
    return seeds


def load_config(path) -> tuple[dict, ScoringWeights]:
    """JSON config: {"scoring": {weight: value}, "scenario": {field: value}}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    weights = ScoringWeights(**raw.get("scoring", {}))
    return dict(raw.get("scenario", {})), weights


def cmd_generate(args) -> int:
    overrides, weights = ({}, ScoringWeights())
    if args.config:
        overrides, weights = load_config(args.config)
    for flag, field in (("patients", "patient_count"), ("organs", "organ_count"),
                        ("horizon", "horizon_days")):
        value = getattr(args, flag)
        if value is not None:
            overrides[field] = value
    config = ScenarioConfig.from_preset(args.preset, weights=weights, **overrides)
    instance = generate_instance(config, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "patients.csv").write_text(patients_to_csv(instance.patients), encoding="utf-8")
    (out / "organs.csv").write_text(organs_to_csv(instance.organs), encoding="utf-8")
    log.info("wrote %d patients and %d organs to %s",
             len(instance.patients), len(instance.organs), out)
    return 0


def cmd_run(args) -> int:
    instance = load_instance(args.patients, args.organs)
    offline = optimal_offline(instance)
    trace = run_simulation(instance, args.mechanism, args.seed)
    metrics = compute_metrics(trace, offline)
    write_report(run_report(instance, args.mechanism, args.seed, trace, metrics, offline),
                 args.report)
    log.info("%s: total_cost=%d offline=%d", args.mechanism, metrics.total_cost,
             offline.total_cost)
    return 0


def cmd_compare(args) -> int:
    instance = load_instance(args.patients, args.organs)
    seeds = parse_seeds(args.seeds)
    offline = optimal_offline(instance)
    mechanisms = {}
    for name in sorted(MECHANISM_NAMES):
        runs = []
        means = []
        for seed in seeds:
            m = compute_metrics(run_simulation(instance, name, seed), offline)
            runs.append({"seed": seed, "metrics": metrics_dict(m)})
            if m.mean_abs_diff is not None:
                means.append(m.mean_abs_diff)
        agg = sum(means, Fraction(0)) / len(means) if means else None
        mechanisms[name] = {
            "runs": runs,
            "aggregate_mean_abs_diff": render_rational(agg),
            "aggregate_mean_abs_diff_decimal": None if agg is None else round(float(agg), 6),
        }
        log.info("%s: aggregate mean |KDPI-EPTS| %s", name, render_rational(agg))
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "seeds": seeds,
        "instance": instance_summary(instance),
        "offline": allocation_dict(offline),
        "mechanisms": mechanisms,
    }
    write_report(report, args.report)
    return 0


def _finding_dict(f):
    if f is None:
        return None
    return {
        "patient": f.patient_id,
        "true_epts": f.true_epts,
        "reported_epts": f.reported_epts,
        "truthful_kdpi": f.truthful_kdpi,
        "misreport_kdpi": f.misreport_kdpi,
        "utility_gain": f.utility_gain,
    }


def cmd_axioms(args) -> int:
    instance = load_instance(args.patients, args.organs)
    trace = run_simulation(instance, args.mechanism, args.seed)
    offline = optimal_offline(instance)
    findings = [
        {"patient": p.id,
         "finding": _finding_dict(find_profitable_misreport(args.mechanism, instance, p.id, args.seed))}
        for p in instance.patients
    ]
    small = min(len(instance.organs), len(instance.patients)) <= BRUTE_FORCE_LIMIT
    efficiency = {}
    for label, alloc in (("mechanism", trace.allocation), ("offline", offline)):
        efficiency[label] = {
            "pairwise_swap_optimal": check_pairwise_swap_optimality(alloc, instance),
            "pareto_efficient": check_pareto_efficiency(alloc, instance) if small else None,
        }
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "axioms",
        "mechanism": args.mechanism,
        "seed": args.seed,
        "instance": instance_summary(instance),
        "manipulable": any(f["finding"] is not None for f in findings),
        "misreports": findings,
        "efficiency": efficiency,
    }
    write_report(report, args.report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="organmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic patients.csv / organs.csv pair")
    g.add_argument("--preset", choices=sorted(PRESETS) + ["custom"], default="era2014")
    g.add_argument("--patients", type=int)
    g.add_argument("--organs", type=int)
    g.add_argument("--horizon", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--config", help="JSON file with 'scoring' weights and 'scenario' overrides")
    g.set_defaults(func=cmd_generate)

    def files(p):
        p.add_argument("--patients", required=True)
        p.add_argument("--organs", required=True)
        p.add_argument("--report", required=True)

    r = sub.add_parser("run", help="simulate one mechanism against the offline optimum")
    r.add_argument("--mechanism", required=True, choices=MECHANISM_NAMES)
    r.add_argument("--seed", type=int, default=0)
    files(r)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="all mechanisms over several seeds")
    c.add_argument("--seeds", nargs="+", default=["0"], help="e.g. 1 2 3 or 0..49")
    files(c)
    c.set_defaults(func=cmd_compare)

    a = sub.add_parser("axioms", help="misreport search and efficiency checks")
    a.add_argument("--mechanism", required=True, choices=MECHANISM_NAMES)
    a.add_argument("--seed", type=int, default=0)
    files(a)
    a.set_defaults(func=cmd_axioms)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    try:
        return args.func(args)
    except (InstanceError, OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        print(f"organmatch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
