"""Two-stage vehicle-to-RSU task offloading: mobility filter, learned node
selection, and optimal divisible-task allocation, with an exact solver and
the comparison baselines."""

from .allocation import (
    CapacityProfile,
    OffloadingPlan,
    PlanVerdict,
    equalized_allocation,
    evaluate_plan,
    iterative_allocation,
)
from .exact_solver import OptimalResult, brute_force_optimal, label_scenario, sorted_prefix_optimal
from .vec_model import (
    GenConfig,
    RsuProfile,
    Scenario,
    SystemParams,
    TaskSpec,
    VehicleState,
    distance_at,
    local_compute_time,
    mobcheck_filter,
    sample_scenario,
    transmission_rate,
)

__version__ = "0.1.0"
