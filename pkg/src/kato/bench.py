"""Experiment harness: success rate under mobility, delay vs the exact optimum,
runtime, and generalization to smaller networks.

Every experiment returns long-format rows (one per scenario and policy) with
the columns in :data:`REPORT_FIELDS`, optionally followed by
experiment-specific columns. Only ``wall_time_us`` varies between reruns.
"""

from __future__ import annotations

import statistics
import time
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exact_solver import DEFAULT_ENUM_CAP, sorted_prefix_optimal
from .neural.model import SelectionModel
from .policies import canonical_policy, run_learned, run_policy
from .vec_model import GenConfig, Scenario, mobcheck_filter, sample_scenario

REPORT_FIELDS = ("scenario_id", "n", "policy", "makespan_s", "tau_star_s", "gap", "success",
                 "wall_time_us", "m_selected", "speed_v")
SPEEDS = (13.0, 15.0, 17.0, 19.0)
SIZES = (20, 30, 40, 50)
DEFAULT_SPEED = 15.0
BASELINES = ("optimal", "kato", "decc", "lb", "mlp", "sa")


def grid_seed(seed: int, n: int, index: int, speed: float = 0.0) -> int:
    key = [seed, n, index, int(round(speed * 1000))]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def grid_scenarios(n: int, count: int, seed: int, speed: float = DEFAULT_SPEED,
                   config: GenConfig | None = None) -> list[Scenario]:
    """``count`` scenarios with exactly ``n`` nodes at a fixed vehicle speed."""
    base = config or GenConfig()
    cfg = GenConfig(n=(n, n), speed=(speed, speed), f_ghz=base.f_ghz, eta_db=base.eta_db,
                    task_Q=base.task_Q, deadline_T=base.deadline_T, params=base.params,
                    max_tries=base.max_tries)
    return [sample_scenario(cfg, grid_seed(seed, n, i, speed), scenario_id=i)
            for i in range(count)]


def downsize(scenario: Scenario, n: int, seed: int) -> Scenario:
    """Randomly drop RSUs until ``n`` nodes remain; survivors keep their order."""
    keep = n - 1
    if keep >= len(scenario.rsus):
        return scenario
    rng = np.random.default_rng([seed, scenario.id, n])
    idx = sorted(rng.choice(len(scenario.rsus), size=keep, replace=False))
    return scenario.with_rsus(scenario.rsus[i] for i in idx)


def _timed(fn, reps: int):
    times = []
    for _ in range(max(1, reps)):
        t0 = time.perf_counter_ns()
        out = fn()
        times.append(time.perf_counter_ns() - t0)
    return out, statistics.median(times) / 1000.0


def evaluate(scenarios: Iterable[Scenario], policies: Sequence[str],
             models: Mapping[str, SelectionModel] | None = None, mobcheck: bool = True,
             reps: int = 1, **extra) -> list[dict]:
    """One row per (scenario, policy); gaps are measured against the exact optimum
    over the mobility-filtered RSUs."""
    policies = [canonical_policy(p) for p in policies]
    rows = []
    for s in scenarios:
        tau_star = sorted_prefix_optimal(s).tau_star
        for name in policies:
            plan, wall = _timed(lambda: run_policy(name, s, models, mobcheck), reps)
            rows.append(_row(s, name, plan, tau_star, wall, **extra))
    return rows


def _row(s: Scenario, policy: str, plan, tau_star: float, wall_us: float, **extra) -> dict:
    row = {
        "scenario_id": s.id, "n": s.n, "policy": policy,
        "makespan_s": plan.makespan, "tau_star_s": tau_star,
        "gap": (plan.makespan - tau_star) / tau_star,
        "success": int(bool(plan.feasible)), "wall_time_us": wall_us,
        "m_selected": len(plan.selected_rsus), "speed_v": s.vehicle.speed_v,
    }
    row.update(extra)
    return row


def bench_success_rate(model: SelectionModel, speeds: Sequence[float] = SPEEDS,
                       sizes: Sequence[int] = SIZES, count: int = 100, seed: int = 0,
                       mobcheck_modes: Sequence[bool] = (True, False)) -> list[dict]:
    """Task success of the learned pipeline with and without the mobility filter."""
    rows = []
    for n in sizes:
        for v in speeds:
            scenarios = grid_scenarios(n, count, seed, v)
            for mc in mobcheck_modes:
                for s in scenarios:
                    tau_star = sorted_prefix_optimal(s).tau_star
                    plan, wall = _timed(lambda: run_learned(s, model, mobcheck=mc), 1)
                    rows.append(_row(s, "kato", plan, tau_star, wall, mobcheck=int(mc)))
    return rows


def bench_delay(models: Mapping[str, SelectionModel] | Mapping[int, Mapping[str, SelectionModel]],
                sizes: Sequence[int] = SIZES, count: int = 10, seed: int = 0,
                speed: float = DEFAULT_SPEED, policies: Sequence[str] = BASELINES) -> list[dict]:
    """Makespan of every policy on ``count`` random topologies per network size.

    ``models`` is either one arch -> model mapping shared by all sizes, or a
    mapping keyed by network size.
    """
    rows = []
    for n in sizes:
        per_size = models.get(n, models) if models else {}
        rows += evaluate(grid_scenarios(n, count, seed, speed), policies, per_size)
    return rows


def bench_runtime(models: Mapping[str, SelectionModel], sizes: Sequence[int] = SIZES,
                  count: int = 5, seed: int = 0, reps: int = 10,
                  policies: Sequence[str] = ("kato", "decc", "lb", "mlp", "sa",
                                             "optimal_prefix", "optimal_bruteforce"),
                  brute_cap: int = 20) -> list[dict]:
    """Median wall time over ``reps`` calls; brute force only where enumeration fits."""
    rows = []
    for n in sizes:
        for s in grid_scenarios(n, count, seed):
            tau_star = sorted_prefix_optimal(s).tau_star
            for name in (canonical_policy(p) for p in policies):
                if name == "optimal_bruteforce" and len(mobcheck_filter(s)) > min(
                        brute_cap, DEFAULT_ENUM_CAP):
                    continue
                plan, wall = _timed(lambda: run_policy(name, s, models), reps)
                rows.append(_row(s, name, plan, tau_star, wall))
    return rows


def bench_generalization(models_by_n: Mapping[int, SelectionModel],
                         eval_sizes: Sequence[int] = SIZES, count: int = 10,
                         seed: int = 0) -> list[dict]:
    """Evaluate each model on test networks shrunk to every size up to its training size.

    The vehicle is static here, so the mobility filter keeps every RSU.
    """
    rows = []
    for train_n, model in sorted(models_by_n.items()):
        base = grid_scenarios(train_n, count, seed, speed=0.0)
        for n in (e for e in eval_sizes if e <= train_n):
            scenarios = [downsize(s, n, seed) for s in base]
            rows += evaluate(scenarios, ("kato", "optimal"), {"kato": model}, train_n=train_n)
    return rows


def summarize(rows: Sequence[dict], keys: Sequence[str] = ("policy",)) -> list[dict]:
    """Mean gap, success rate and median wall time per group."""
    groups = defaultdict(list)
    for r in rows:
        groups[tuple(r[k] for k in keys)].append(r)
    out = []
    for key, rs in sorted(groups.items(), key=lambda kv: tuple(map(str, kv[0]))):
        out.append({**dict(zip(keys, key)), "count": len(rs),
                    "mean_gap": float(np.mean([float(r["gap"]) for r in rs])),
                    "success_rate": float(np.mean([int(r["success"]) for r in rs])),
                    "median_wall_us": float(np.median([float(r["wall_time_us"]) for r in rs]))})
    return out
