"""Exact node selection after the mobility filter.

For a fixed RSU count m, every RSU's unit cost ``c_i(m)`` is independent of
which other RSUs join, and the equalized makespan is
``Q / (1/beta0 + sum 1/c_i(m))``. The best size-m set is therefore the m
cheapest RSUs at that m, which gives the polynomial
:func:`sorted_prefix_optimal`. :func:`brute_force_optimal` enumerates every
subset and serves as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import (
    CapacityProfile,
    OffloadingPlan,
    equalized_allocation,
    evaluate_plan,
)
from .neural.features import LabeledSample, encode_sort
from .vec_model import VEHICLE_ID, Scenario, mobcheck_filter, mobcheck_horizon, unit_tx_costs

DEFAULT_ENUM_CAP = 22
TIE_ABS = 1e-12
_CHUNK = 1 << 15


class EnumerationCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OptimalResult:
    best_set: tuple[int, ...]  # vehicle first, RSU ids ascending
    best_plan: OffloadingPlan
    tau_star: float
    subsets_evaluated: int
    feasible: bool = True


def _problem(scenario: Scenario, mobcheck: bool = True):
    rsus = mobcheck_filter(scenario) if mobcheck else scenario.rsus
    ids = np.array([r.id for r in rsus], dtype=np.int64)
    beta = np.array([r.beta for r in rsus], dtype=float)
    tx = unit_tx_costs(rsus, scenario.vehicle, scenario.params)
    return rsus, ids, beta, tx


def _result(scenario: Scenario, chosen_ids, beta, tx, ids, tau, evaluated, check_range):
    pos = {int(i): k for k, i in enumerate(ids)}
    chosen = sorted(int(i) for i in chosen_ids)
    m = len(chosen)
    caps = [CapacityProfile(VEHICLE_ID, scenario.vehicle.beta0, 0)]
    caps += [CapacityProfile(i, float(beta[pos[i]] + m * tx[pos[i]]), m) for i in chosen]
    plan = equalized_allocation(caps, scenario.task.size_Q)
    verdict = evaluate_plan(plan, scenario)
    feasible = tau <= scenario.task.deadline_T
    if feasible and check_range:
        # Any plan finishing before the filter horizon keeps its RSUs in range.
        assert plan.makespan <= mobcheck_horizon(scenario) * (1 + 1e-9)
        assert "C5" not in verdict.violated, verdict
    return OptimalResult(
        best_set=(VEHICLE_ID,) + tuple(chosen),
        best_plan=plan.with_verdict(verdict),
        tau_star=plan.makespan,
        subsets_evaluated=evaluated,
        feasible=bool(feasible),
    )


def _pick(taus: np.ndarray, feasible: np.ndarray) -> float:
    pool = taus[feasible] if feasible.any() else taus
    return float(pool.min())


def brute_force_optimal(scenario: Scenario, cap: int = DEFAULT_ENUM_CAP,
                        mobcheck: bool = True) -> OptimalResult:
    """Enumerate every subset of the filtered RSUs.

    Ties within ``1e-12`` s go to the smaller set, then to the
    lexicographically smallest id tuple. If no subset meets the deadline the
    global minimum is returned with ``feasible=False``.
    """
    rsus, ids, beta, tx = _problem(scenario, mobcheck)
    k = len(rsus)
    if k > cap:
        raise EnumerationCapExceeded(
            f"{k} RSUs survive the filter, above the enumeration cap of {cap}; "
            "use sorted_prefix_optimal instead")
    Q = scenario.task.size_Q
    T = scenario.task.deadline_T
    inv_vehicle = 1.0 / scenario.vehicle.beta0
    bitpos = np.arange(k, dtype=np.int64)
    # inv_cost[m, i] = 1 / c_i(m)
    inv_cost = 1.0 / (beta[None, :] + np.arange(k + 1)[:, None] * tx[None, :])

    n_sub = 1 << k
    taus = np.empty(n_sub)
    sizes = np.empty(n_sub, dtype=np.int64)
    for start in range(0, n_sub, _CHUNK):
        masks = np.arange(start, min(start + _CHUNK, n_sub), dtype=np.int64)
        bits = ((masks[:, None] >> bitpos[None, :]) & 1).astype(bool)
        size = bits.sum(axis=1)
        total = inv_vehicle + np.where(bits, inv_cost[size], 0.0).sum(axis=1)
        taus[start:start + len(masks)] = Q / total
        sizes[start:start + len(masks)] = size

    feasible = taus <= T
    best = _pick(taus, feasible)
    eligible = np.flatnonzero((taus <= best + TIE_ABS) & (feasible if feasible.any() else True))
    min_size = sizes[eligible].min()
    candidates = [tuple(sorted(int(ids[b]) for b in range(k) if (mask >> b) & 1))
                  for mask in eligible[sizes[eligible] == min_size]]
    chosen = min(candidates)
    return _result(scenario, chosen, beta, tx, ids, best, n_sub, mobcheck)


def sorted_prefix_optimal(scenario: Scenario, mobcheck: bool = True) -> OptimalResult:
    """Exact optimum in O(n^2 log n): best prefix of the cost-sorted RSUs for each m."""
    rsus, ids, beta, tx = _problem(scenario, mobcheck)
    k = len(rsus)
    Q = scenario.task.size_Q
    T = scenario.task.deadline_T
    inv_vehicle = 1.0 / scenario.vehicle.beta0

    ms = np.arange(k + 1)
    costs = beta[None, :] + ms[:, None] * tx[None, :]
    # lexsort: last key is primary -> cost ascending, then id ascending
    order = np.stack([np.lexsort((ids, row)) for row in costs]) if k else np.empty((1, 0), int)
    sorted_inv = 1.0 / np.take_along_axis(costs, order, axis=1)
    # row m holds the costs at sharing count m; only its first m entries count
    cums = np.cumsum(sorted_inv, axis=1)
    prefix = np.concatenate([[0.0], cums[ms[1:], ms[1:] - 1]])
    taus = Q / (inv_vehicle + prefix)

    feasible = taus <= T
    best = _pick(taus, feasible)
    eligible = (taus <= best + TIE_ABS) & (feasible if feasible.any() else True)
    m_best = int(np.flatnonzero(eligible)[0])
    chosen = ids[order[m_best, :m_best]]
    return _result(scenario, chosen, beta, tx, ids, best, k + 1, mobcheck)


def solve(scenario: Scenario, method: str = "prefix", mobcheck: bool = True) -> OptimalResult:
    if method == "prefix":
        return sorted_prefix_optimal(scenario, mobcheck=mobcheck)
    if method in ("bruteforce", "brute_force"):
        return brute_force_optimal(scenario, mobcheck=mobcheck)
    raise ValueError(f"unknown exact method {method!r}")


def label_scenario(scenario: Scenario, method: str = "prefix") -> tuple[LabeledSample, OptimalResult]:
    """Per-node 0/1 optimal-selection labels in the model's canonical row order."""
    result = solve(scenario, method)
    features, node_ids = encode_sort(scenario.vehicle, mobcheck_filter(scenario))
    chosen = set(result.best_set)
    labels = np.array([1.0 if i in chosen else 0.0 for i in node_ids])
    labels[0] = 1.0
    sample = LabeledSample(features=features, labels=labels, node_ids=tuple(node_ids),
                           scenario_id=scenario.id, tau_star=result.tau_star)
    return sample, result
