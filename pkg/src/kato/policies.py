"""Scenario -> OffloadingPlan policies: the learned pipeline and every baseline.

Every returned plan has its feasibility verdict attached by
:func:`~kato.allocation.evaluate_plan`.
"""

from __future__ import annotations

from typing import Mapping

from .allocation import (
    CapacityProfile,
    OffloadingPlan,
    allocate,
    equalized_allocation,
    evaluate_plan,
    link_cost,
    local_only_plan,
    rsu_links,
)
from .exact_solver import solve
from .neural.model import SelectionModel, canonical_arch, predict_selection
from .vec_model import VEHICLE_ID, Scenario, mobcheck_filter

POLICIES = ("kato", "optimal_bruteforce", "optimal_prefix", "decc", "lb", "mlp", "sa",
            "local_only")
LEARNED = {"kato": "kato", "mlp": "perceptron", "sa": "standard_attention"}
ALIASES = {"optimal": "optimal_prefix"}


def canonical_policy(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in POLICIES:
        raise ValueError(f"unknown policy {name!r}; expected one of {POLICIES + tuple(ALIASES)}")
    return name


def _candidates(scenario: Scenario, mobcheck: bool):
    return mobcheck_filter(scenario) if mobcheck else scenario.rsus


def run_learned(scenario: Scenario, model: SelectionModel, mobcheck: bool = True,
                order_seed: int | None = None) -> OffloadingPlan:
    """Filter, select with ``model``, then allocate over the selection plus the vehicle."""
    survivors = _candidates(scenario, mobcheck)
    chosen = set(predict_selection(model, scenario.vehicle, survivors))
    return allocate(scenario, [r for r in survivors if r.id in chosen], order_seed)


def run_kato(scenario: Scenario, model: SelectionModel, mobcheck: bool = True,
             order_seed: int | None = None) -> OffloadingPlan:
    if model.arch != "kato":
        raise ValueError(f"run_kato needs a kato model, got {model.arch!r}")
    return run_learned(scenario, model, mobcheck, order_seed)


def run_learned_baseline(scenario: Scenario, model: SelectionModel,
                         arch: str, mobcheck: bool = True) -> OffloadingPlan:
    if canonical_arch(arch) != model.arch or model.arch == "kato":
        raise ValueError(f"baseline {arch!r} cannot run a {model.arch!r} model")
    return run_learned(scenario, model, mobcheck)


def run_decc(scenario: Scenario, mobcheck: bool = True) -> OffloadingPlan:
    """Partial offloading to the single RSU that minimizes the two-node makespan."""
    survivors = _candidates(scenario, mobcheck)
    if not survivors:
        plan = local_only_plan(scenario)
        return plan.with_verdict(evaluate_plan(plan, scenario))
    B, Q = scenario.params.bandwidth_B, scenario.task.size_Q
    vehicle = CapacityProfile(VEHICLE_ID, scenario.vehicle.beta0, 0)
    best = None
    for link in rsu_links(scenario, survivors):
        plan = equalized_allocation([vehicle, CapacityProfile(link.node_id,
                                                              link_cost(link, B, 1), 1)], Q)
        if best is None or plan.makespan < best.makespan:
            best = plan
    return best.with_verdict(evaluate_plan(best, scenario))


def run_lb(scenario: Scenario, mobcheck: bool = True) -> OffloadingPlan:
    """Split in proportion to computing power over the vehicle and every candidate RSU."""
    survivors = _candidates(scenario, mobcheck)
    b = scenario.params.cycles_per_bit_b
    power = {VEHICLE_ID: b / scenario.vehicle.beta0}
    power.update({r.id: b / r.beta for r in survivors})
    total = sum(power.values())
    Q = scenario.task.size_Q
    shares = {i: Q * f / total for i, f in power.items()}
    plan = OffloadingPlan(selected=tuple(power), shares_q=shares, makespan=float("nan"))
    verdict = evaluate_plan(plan, scenario)
    return OffloadingPlan(plan.selected, shares, verdict.makespan, verdict.success,
                          verdict.violated)


def run_optimal(scenario: Scenario, variant: str = "prefix", mobcheck: bool = True) -> OffloadingPlan:
    return solve(scenario, variant, mobcheck=mobcheck).best_plan


def run_local_only(scenario: Scenario) -> OffloadingPlan:
    plan = local_only_plan(scenario)
    return plan.with_verdict(evaluate_plan(plan, scenario))


def run_policy(name: str, scenario: Scenario,
               models: Mapping[str, SelectionModel] | None = None,
               mobcheck: bool = True) -> OffloadingPlan:
    """Dispatch by policy tag; learned tags look up their model by architecture."""
    name = canonical_policy(name)
    if name in LEARNED:
        arch = LEARNED[name]
        by_arch = {canonical_arch(k): m for k, m in (models or {}).items()}
        model = by_arch.get(arch)
        if model is None:
            raise ValueError(f"policy {name!r} needs a trained {arch!r} model")
        return run_learned(scenario, model, mobcheck)
    if name == "decc":
        return run_decc(scenario, mobcheck)
    if name == "lb":
        return run_lb(scenario, mobcheck)
    if name == "optimal_prefix":
        return run_optimal(scenario, "prefix", mobcheck)
    if name == "optimal_bruteforce":
        return run_optimal(scenario, "bruteforce", mobcheck)
    return run_local_only(scenario)
