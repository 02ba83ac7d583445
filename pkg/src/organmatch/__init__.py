"""Online deceased-donor kidney allocation: scoring, mechanisms, offline optimum, axioms."""

from .axioms import (
    MisreportFinding,
    check_pairwise_swap_optimality,
    check_pareto_efficiency,
    find_profitable_misreport,
)
from .mechanisms import MECHANISM_NAMES, WaitlistState
from .offline import Allocation, brute_force_offline, optimal_offline
from .population import (
    Instance,
    Organ,
    Patient,
    ScenarioConfig,
    generate_instance,
    parse_organs,
    parse_patients,
    validate_instance,
)
from .scoring import (
    DonorProfile,
    RecipientProfile,
    percentile_score,
    raw_donor_risk,
    raw_recipient_risk,
)
from .simulator import Metrics, Trace, compute_metrics, run_simulation

__version__ = "0.1.0"
