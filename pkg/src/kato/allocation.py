"""Divisible-task allocation over a fixed set of compute nodes.

For a fixed node set the min-max makespan is reached when every node finishes
at the same instant; :func:`equalized_allocation` gives that split in closed
form and :func:`iterative_allocation` reaches it one RSU at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .vec_model import (
    VEHICLE_ID,
    RsuProfile,
    Scenario,
    distance_to,
    transmission_rate,
)

REL_TOL = 1e-9
_RANGE_TOL = 1e-9  # meters


@dataclass(frozen=True)
class CapacityProfile:
    node_id: int
    unit_cost_c: float
    m: int = 0  # bandwidth-sharing count; 0 for the vehicle

    def __post_init__(self):
        if not self.unit_cost_c > 0:
            raise ValueError(f"node {self.node_id}: unit cost must be positive")


@dataclass(frozen=True)
class OffloadingPlan:
    selected: tuple[int, ...]
    shares_q: dict[int, float]
    makespan: float
    feasible: bool | None = None
    violated: tuple[str, ...] = ()

    @property
    def selected_rsus(self) -> tuple[int, ...]:
        return tuple(i for i in self.selected if i != VEHICLE_ID)

    def with_verdict(self, verdict: PlanVerdict) -> OffloadingPlan:
        return replace(self, feasible=verdict.success, violated=verdict.violated)

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "shares": {str(k): v for k, v in self.shares_q.items()},
            "makespan": self.makespan,
            "feasible": self.feasible,
            "violated": list(self.violated),
        }

    @classmethod
    def from_dict(cls, d: dict) -> OffloadingPlan:
        return cls(
            selected=tuple(int(i) for i in d["selected"]),
            shares_q={int(k): float(v) for k, v in d["shares"].items()},
            makespan=float(d["makespan"]),
            feasible=d["feasible"],
            violated=tuple(d["violated"]),
        )


class PlanVerdict(NamedTuple):
    success: bool
    makespan: float
    violated: tuple[str, ...]
    completion_times: dict[int, float]


class Link(NamedTuple):
    """What the allocator needs to know about one RSU."""

    node_id: int
    beta: float
    eta_lin: float
    d0: float


def rsu_links(scenario: Scenario, rsus: Sequence[RsuProfile]) -> list[Link]:
    v = scenario.vehicle
    return [Link(r.id, r.beta, r.eta_lin, distance_to(v, r, 0.0)) for r in rsus]


def link_cost(link: Link, B: float, m: int) -> float:
    return link.beta + 1.0 / transmission_rate(link.eta_lin, link.d0, B, m)


def capacity_profile(beta0: float, links: Sequence[Link], B: float) -> list[CapacityProfile]:
    """Vehicle first, then every RSU with the sharing count set to ``len(links)``."""
    m = len(links)
    caps = [CapacityProfile(VEHICLE_ID, beta0, 0)]
    caps += [CapacityProfile(l.node_id, link_cost(l, B, m), m) for l in links]
    return caps


def equalized_allocation(capacities: Sequence[CapacityProfile], Q: float) -> OffloadingPlan:
    """Split ``Q`` so every node finishes at ``tau = Q / sum(1/c)``."""
    if not capacities:
        raise ValueError("equalized_allocation needs at least one node")
    inv = np.array([1.0 / c.unit_cost_c for c in capacities])
    total = float(inv.sum())
    tau = Q / total
    shares = {c.node_id: Q * float(w) / total for c, w in zip(capacities, inv)}
    return OffloadingPlan(selected=tuple(c.node_id for c in capacities),
                          shares_q=shares, makespan=tau)


@dataclass
class AllocationStep:
    """State after one insertion of the iterative procedure."""

    k: int
    newcomer: int | None
    ratio_I: float  # tau^{k-1} / tau^k; nan at k = 0
    capacities: dict[int, float]
    shares: dict[int, float]
    yielded: dict[int, float] = field(default_factory=dict)

    @property
    def tau(self) -> float:
        return max(self.shares[i] * self.capacities[i] for i in self.shares)


def iterative_allocation_steps(beta0: float, links: Sequence[Link], B: float, Q: float,
                               order_seed: int | None = None) -> Iterator[AllocationStep]:
    """Yield the allocation after each RSU insertion, starting from local-only.

    At step k the newcomer joins, every member RSU's cost is recomputed with
    sharing count ``k``, and each existing member hands part of its share to
    the newcomer. The scaling ratio ``I`` between consecutive makespans is
    read off any pre-existing member (all agree while the finish times are
    equal); it is fixed by requiring the yielded amounts to sum to exactly
    the newcomer's share.
    """
    order = list(links)
    if order_seed is not None:
        perm = np.random.default_rng(order_seed).permutation(len(order))
        order = [order[i] for i in perm]

    caps = {VEHICLE_ID: beta0}
    shares = {VEHICLE_ID: Q}
    yield AllocationStep(0, None, math.nan, dict(caps), dict(shares))

    members: list[Link] = []
    for k, newcomer in enumerate(order, start=1):
        members.append(newcomer)
        new_caps = {VEHICLE_ID: beta0}
        for l in members:
            new_caps[l.node_id] = link_cost(l, B, k)
            if not new_caps[l.node_id] > 0:
                raise ValueError(f"node {l.node_id}: non-positive capacity")

        # Conservation of Q pins I: existing members keep q*c_old/(I*c_new),
        # the newcomer finishes with the vehicle, which is the reference member.
        c_s = new_caps[newcomer.node_id]
        ratio = (sum(q * caps[j] / new_caps[j] for j, q in shares.items())
                 + shares[VEHICLE_ID] * beta0 / c_s) / Q

        new_shares = {}
        yielded = {}
        for j, q_prev in shares.items():
            give = (1.0 - caps[j] / (ratio * new_caps[j])) * q_prev
            yielded[j] = give
            new_shares[j] = q_prev - give
        new_shares[newcomer.node_id] = sum(yielded.values())

        caps, shares = new_caps, new_shares
        yield AllocationStep(k, newcomer.node_id, ratio, dict(caps), dict(shares), yielded)


def iterative_allocation(beta0: float, links: Sequence[Link], B: float, Q: float,
                         order_seed: int | None = None) -> OffloadingPlan:
    """Optimal allocation over the vehicle plus ``links``, built by insertion.

    The output does not depend on ``order_seed`` beyond rounding.
    """
    for step in iterative_allocation_steps(beta0, links, B, Q, order_seed):
        pass
    selected = (VEHICLE_ID,) + tuple(l.node_id for l in links)
    shares = {i: step.shares[i] for i in selected}
    return OffloadingPlan(selected=selected, shares_q=shares, makespan=step.tau)


def evaluate_plan(plan: OffloadingPlan, scenario: Scenario) -> PlanVerdict:
    """Recompute completion times and check every constraint of the problem.

    Tags: C1 task integrity, C2 share bounds, C3 non-empty selection,
    C4 deadline, C5 RSU still in range at its own completion time.
    """
    selected = set(plan.selected)
    extra = set(plan.shares_q) - selected
    if extra:
        raise ValueError(f"plan assigns shares to unselected nodes {sorted(extra)}")

    Q = scenario.task.size_Q
    T = scenario.task.deadline_T
    xi = scenario.params.comm_range_xi
    B = scenario.params.bandwidth_B
    v = scenario.vehicle
    rsu_ids = [i for i in plan.selected if i != VEHICLE_ID]
    m = len(rsu_ids)

    violated = []
    shares = {i: plan.shares_q.get(i, 0.0) for i in plan.selected}
    if not math.isclose(sum(shares.values()), Q, rel_tol=REL_TOL, abs_tol=1e-12):
        violated.append("C1")
    if any(q < -1e-12 or q > Q * (1 + REL_TOL) for q in shares.values()):
        violated.append("C2")
    if not plan.selected:
        violated.append("C3")

    times = {}
    out_of_range = False
    for i in plan.selected:
        q = shares[i]
        if i == VEHICLE_ID:
            times[i] = q * v.beta0
            continue
        r = scenario.rsu(i)
        rate = transmission_rate(r.eta_lin, distance_to(v, r, 0.0), B, m)
        u = q / rate + q * r.beta
        times[i] = u
        if distance_to(v, r, u) > xi + _RANGE_TOL:
            out_of_range = True
    makespan = max(times.values()) if times else math.inf
    if makespan > T * (1 + REL_TOL):
        violated.append("C4")
    if out_of_range:
        violated.append("C5")
    return PlanVerdict(not violated, makespan, tuple(violated), times)


def local_only_plan(scenario: Scenario) -> OffloadingPlan:
    Q = scenario.task.size_Q
    return OffloadingPlan(selected=(VEHICLE_ID,), shares_q={VEHICLE_ID: Q},
                          makespan=Q * scenario.vehicle.beta0)


def allocate(scenario: Scenario, rsus: Sequence[RsuProfile],
             order_seed: int | None = None) -> OffloadingPlan:
    """Iterative allocation over the vehicle plus ``rsus``, with the verdict attached."""
    if not rsus:
        plan = local_only_plan(scenario)
    else:
        plan = iterative_allocation(scenario.vehicle.beta0, rsu_links(scenario, rsus),
                                    scenario.params.bandwidth_B, scenario.task.size_Q,
                                    order_seed)
    return plan.with_verdict(evaluate_plan(plan, scenario))
