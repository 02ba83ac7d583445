"""Exit criteria. Each test is one criterion; time limits are asserted too.

Run alone with `pytest tests/test_acceptance.py`; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import json
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from instances import MANIPULABLE, RUNNING, random_instance
from organmatch.axioms import (
    check_pairwise_swap_optimality,
    check_pareto_efficiency,
    find_profitable_misreport,
)
from organmatch.cli import main
from organmatch.experiments import mechanism_separation
from organmatch.mechanisms import MECHANISM_NAMES
from organmatch.offline import Allocation, brute_force_offline, optimal_offline
from organmatch.population import (
    ScenarioConfig,
    generate_profiles,
    organs_to_csv,
    patients_to_csv,
)
from organmatch.report import parse_rational
from organmatch.scoring import DonorProfile, kdpi_scores
from organmatch.simulator import run_simulation

RESULTS = Path(__file__).resolve().parents[1] / "results" / "mechanism_separation.json"


def test_c1_oracle_equivalence():
    rng = random.Random(1001)
    start = time.perf_counter()
    for _ in range(1000):
        inst = random_instance(rng, 6, 6, days=30)
        fast, slow = optimal_offline(inst), brute_force_offline(inst)
        assert (fast.matched_count, fast.total_cost, fast.pairs) == (
            slow.matched_count, slow.total_cost, slow.pairs)
    assert time.perf_counter() - start < 10


def test_c2_dominance():
    rng = random.Random(1002)
    start = time.perf_counter()
    for i in range(1000):
        inst = random_instance(rng, 50, 50, days=365)
        best = optimal_offline(inst)
        for mechanism in MECHANISM_NAMES:
            online = run_simulation(inst, mechanism, i).allocation
            assert best.matched_count >= online.matched_count
            if best.matched_count == online.matched_count:
                assert best.total_cost <= online.total_cost
    assert time.perf_counter() - start < 30


def test_c3_percentile_semantics():
    distinct = [DonorProfile(float(age)) for age in range(100)]
    random.Random(3).shuffle(distinct)
    assert sorted(kdpi_scores(distinct)) == list(range(100))
    assert kdpi_scores([DonorProfile(55.0, True)] * 100) == [0] * 100


def test_c4_scenario_statistics():
    for preset, seed, mean, cap in (("era1989", 1989, 32, 69), ("era2014", 2014, 46, 80)):
        config = ScenarioConfig.from_preset(preset, organ_count=10_000, patient_count=0)
        donors, _, _, _ = generate_profiles(config, seed)
        ages = np.array([d.age for d in donors])
        assert abs(ages.mean() - mean) <= 1, (preset, ages.mean())
        assert ages.max() <= cap


def test_c5_mechanism_separation():
    start = time.perf_counter()
    config = ScenarioConfig.from_preset("era2014", patient_count=500, organ_count=400,
                                        horizon_days=365)
    res = mechanism_separation(range(50), config, mechanisms=("fifo", "greedy"))
    greedy, fifo = res["greedy"]["aggregate"], res["fifo"]["aggregate"]
    assert greedy < fifo
    assert time.perf_counter() - start < 60
    # the committed results file must hold these exact values
    recorded = json.loads(RESULTS.read_text())["aggregate_mean_abs_diff"]
    assert Fraction(recorded["greedy"]) == greedy
    assert Fraction(recorded["fifo"]) == fifo


def test_c6_strategyproofness():
    rng = random.Random(1006)
    start = time.perf_counter()
    for i in range(200):
        inst = random_instance(rng, 10, 10, days=30)
        for p in inst.patients:
            assert find_profitable_misreport("fifo", inst, p.id, seed=i) is None
    finding = find_profitable_misreport("greedy", MANIPULABLE, "A")
    assert finding is not None and finding.utility_gain == 45
    assert finding.reported_epts <= 44 and finding.misreport_kdpi == 45
    replay = run_simulation(MANIPULABLE.with_epts("A", finding.reported_epts), "greedy", 0)
    assert ("o1", "A") in replay.allocation.pairs
    assert time.perf_counter() - start < 60


def test_c7_determinism(tmp_path):
    (tmp_path / "patients.csv").write_text(patients_to_csv(RUNNING.patients))
    (tmp_path / "organs.csv").write_text(organs_to_csv(RUNNING.organs))
    reports = []
    for name in ("a.json", "b.json"):
        argv = ["run", "--mechanism", "greedy", "--patients", str(tmp_path / "patients.csv"),
                "--organs", str(tmp_path / "organs.csv"), "--seed", "0",
                "--report", str(tmp_path / name)]
        assert main(argv) == 0
        reports.append((tmp_path / name).read_bytes())
    assert reports[0] == reports[1]
    data = json.loads(reports[0])
    assert data["metrics"]["total_cost"] == 55
    assert data["offline"]["total_cost"] == 45
    assert parse_rational(data["metrics"]["competitive_ratio"]) == Fraction(11, 9)


def test_c8_efficiency_checks():
    rng = random.Random(1008)
    start = time.perf_counter()
    for _ in range(200):
        inst = random_instance(rng, 8, 6, days=30)
        best = optimal_offline(inst)
        assert check_pareto_efficiency(best, inst)
        assert check_pairwise_swap_optimality(best, inst)
    greedy = Allocation((("o1", "pb"), ("o2", "pa")), (10, 45))
    assert run_simulation(RUNNING, "greedy", 0).allocation == greedy
    assert not check_pareto_efficiency(greedy, RUNNING)
    assert not check_pairwise_swap_optimality(greedy, RUNNING)
    assert time.perf_counter() - start < 60
