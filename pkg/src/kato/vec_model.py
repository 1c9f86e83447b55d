"""Vehicle/RSU system model: domain types, sampling, channel and compute primitives.

Units are chosen so no conversion constants appear anywhere: bandwidth is
carried in GHz, task sizes in Gbit, compute cost in s/Gbit, so every rate is
in Gbit/s and every time in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

VEHICLE_ID = 0


class ConfigurationError(ValueError):
    """Raised when a generator configuration cannot produce a valid scenario."""


@dataclass(frozen=True)
class SystemParams:
    bandwidth_B: float = 50.0
    comm_range_xi: float = 150.0
    cycles_per_bit_b: float = 1.0
    area_side: float = 100.0

    def __post_init__(self):
        if self.bandwidth_B <= 0 or self.comm_range_xi <= 0 or self.cycles_per_bit_b <= 0:
            raise ValueError(f"system parameters must be positive: {self}")


@dataclass(frozen=True)
class TaskSpec:
    size_Q: float
    deadline_T: float

    def __post_init__(self):
        if self.size_Q <= 0 or self.deadline_T <= 0:
            raise ValueError(f"task size and deadline must be positive: {self}")


@dataclass(frozen=True)
class VehicleState:
    x0: float
    y0: float
    speed_v: float
    beta0: float

    def __post_init__(self):
        if self.speed_v < 0:
            raise ValueError("vehicle speed must be non-negative")
        if self.beta0 <= 0:
            raise ValueError("vehicle beta0 must be positive")


@dataclass(frozen=True)
class RsuProfile:
    id: int
    x: float
    y: float
    beta: float
    eta_db: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"RSU {self.id}: beta must be positive")

    @property
    def eta_lin(self) -> float:
        return db_to_linear(self.eta_db)


@dataclass(frozen=True)
class Scenario:
    id: int
    vehicle: VehicleState
    task: TaskSpec
    rsus: tuple[RsuProfile, ...]
    params: SystemParams = field(default_factory=SystemParams)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rsus", tuple(self.rsus))
        ids = [r.id for r in self.rsus]
        if len(set(ids)) != len(ids) or VEHICLE_ID in ids:
            raise ValueError(f"RSU ids must be unique and non-zero: {ids}")
        for r in self.rsus:
            d = math.hypot(r.x - self.vehicle.x0, r.y - self.vehicle.y0)
            if d > self.params.comm_range_xi:
                raise ValueError(f"RSU {r.id} out of range at t=0 (d={d:.3f})")

    @property
    def n(self) -> int:
        """Number of compute nodes, vehicle included."""
        return len(self.rsus) + 1

    def rsu(self, rsu_id: int) -> RsuProfile:
        for r in self.rsus:
            if r.id == rsu_id:
                return r
        raise KeyError(f"scenario {self.id} has no RSU with id {rsu_id}")

    def with_rsus(self, rsus: Iterable[RsuProfile]) -> Scenario:
        return replace(self, rsus=tuple(rsus))

    def to_dict(self) -> dict:
        v, t, p = self.vehicle, self.task, self.params
        return {
            "id": self.id,
            "seed": self.seed,
            "vehicle": {"x": v.x0, "y": v.y0, "v": v.speed_v, "beta0": v.beta0},
            "task": {"Q": t.size_Q, "T": t.deadline_T},
            "params": {"B": p.bandwidth_B, "xi": p.comm_range_xi,
                       "b": p.cycles_per_bit_b, "area_side": p.area_side},
            "rsus": [{"id": r.id, "x": r.x, "y": r.y, "beta": r.beta, "eta_db": r.eta_db}
                     for r in self.rsus],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        v, t, p = d["vehicle"], d["task"], d["params"]
        return cls(
            id=int(d["id"]),
            seed=int(d["seed"]),
            vehicle=VehicleState(x0=v["x"], y0=v["y"], speed_v=v["v"], beta0=v["beta0"]),
            task=TaskSpec(size_Q=t["Q"], deadline_T=t["T"]),
            params=SystemParams(bandwidth_B=p["B"], comm_range_xi=p["xi"],
                                cycles_per_bit_b=p["b"],
                                area_side=p.get("area_side", 100.0)),
            rsus=tuple(RsuProfile(id=int(r["id"]), x=r["x"], y=r["y"],
                                  beta=r["beta"], eta_db=r["eta_db"]) for r in d["rsus"]),
        )


@dataclass(frozen=True)
class GenConfig:
    """Ranges for random scenario generation.

    ``n`` counts compute nodes including the vehicle, so a scenario carries
    ``n - 1`` RSUs. Ranges are closed intervals; a degenerate interval
    ``(a, a)`` pins the value.
    """

    n: tuple[int, int] = (20, 20)
    speed: tuple[float, float] = (15.0, 15.0)
    f_ghz: tuple[float, float] = (0.1, 10.0)
    eta_db: tuple[float, float] = (20.0, 30.0)
    task_Q: float = 1.0
    deadline_T: float | None = None  # None -> T = T_loc
    params: SystemParams = field(default_factory=SystemParams)
    max_tries: int = 1000

    def __post_init__(self):
        for name in ("n", "speed", "f_ghz", "eta_db"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigurationError(f"{name} range is empty: {(lo, hi)}")
        if self.n[0] < 1:
            raise ConfigurationError("n must be at least 1 (the vehicle)")
        if self.f_ghz[0] <= 0 or self.speed[0] < 0:
            raise ConfigurationError("f must be positive and speed non-negative")

    def to_dict(self) -> dict:
        p = self.params
        return {
            "n": list(self.n), "speed": list(self.speed), "f_ghz": list(self.f_ghz),
            "eta_db": list(self.eta_db), "task_Q": self.task_Q, "deadline_T": self.deadline_T,
            "params": {"B": p.bandwidth_B, "xi": p.comm_range_xi,
                       "b": p.cycles_per_bit_b, "area_side": p.area_side},
            "max_tries": self.max_tries,
        }

    @classmethod
    def from_dict(cls, d: dict) -> GenConfig:
        p = d["params"]
        return cls(
            n=tuple(d["n"]), speed=tuple(d["speed"]), f_ghz=tuple(d["f_ghz"]),
            eta_db=tuple(d["eta_db"]), task_Q=d["task_Q"], deadline_T=d["deadline_T"],
            params=SystemParams(p["B"], p["xi"], p["b"], p["area_side"]),
            max_tries=d["max_tries"],
        )

    @classmethod
    def fixed(cls, n: int = 20, speed: float = 15.0, **kw) -> GenConfig:
        return cls(n=(n, n), speed=(speed, speed), **kw)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def sample_scenario(config: GenConfig, seed: int, scenario_id: int = 0) -> Scenario:
    """Draw one scenario; a pure function of ``(config, seed)``.

    RSU positions are redrawn (never clamped) until they lie within range of
    the vehicle's starting point, so their distribution stays uniform over the
    reachable part of the area.
    """
    rng = np.random.default_rng(seed)
    p = config.params
    side = p.area_side
    x0, y0 = (float(u) for u in rng.uniform(0.0, side, size=2))
    speed = float(rng.uniform(*config.speed))
    beta0 = p.cycles_per_bit_b / float(rng.uniform(*config.f_ghz))
    n = int(rng.integers(config.n[0], config.n[1], endpoint=True))

    rsus = []
    for rid in range(1, n):
        for _ in range(config.max_tries):
            x, y = (float(u) for u in rng.uniform(0.0, side, size=2))
            if math.hypot(x - x0, y - y0) <= p.comm_range_xi:
                break
        else:
            raise ConfigurationError(
                f"could not place RSU {rid} within xi={p.comm_range_xi} m of the vehicle "
                f"after {config.max_tries} draws; area_side={side} is too large")
        beta = p.cycles_per_bit_b / float(rng.uniform(*config.f_ghz))
        eta_db = float(rng.uniform(*config.eta_db))
        rsus.append(RsuProfile(id=rid, x=x, y=y, beta=beta, eta_db=eta_db))

    t_loc = config.task_Q * beta0
    deadline = t_loc if config.deadline_T is None else config.deadline_T
    return Scenario(
        id=scenario_id,
        vehicle=VehicleState(x0=x0, y0=y0, speed_v=speed, beta0=beta0),
        task=TaskSpec(size_Q=config.task_Q, deadline_T=deadline),
        rsus=tuple(rsus),
        params=p,
        seed=seed,
    )


def vehicle_position(vehicle: VehicleState, t: float) -> tuple[float, float]:
    return vehicle.x0 + vehicle.speed_v * t, vehicle.y0


def distance_to(vehicle: VehicleState, rsu: RsuProfile, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    x, y = vehicle_position(vehicle, t)
    return math.hypot(rsu.x - x, rsu.y - y)


def distance_at(scenario: Scenario, rsu_id: int, t: float) -> float:
    """Vehicle-to-RSU distance after ``t`` seconds of straight-line motion along +x."""
    return distance_to(scenario.vehicle, scenario.rsu(rsu_id), t)


def transmission_rate(eta_lin: float, d: float, B: float, m: int) -> float:
    """Link rate in Gbit/s when the bandwidth ``B`` is split evenly over ``m`` RSUs."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if d <= 0:
        raise ValueError("distance must be positive (degenerate geometry)")
    return (B / m) * math.log2(1.0 + eta_lin / (d * d))


def local_compute_time(task: TaskSpec, vehicle: VehicleState) -> float:
    return task.size_Q * vehicle.beta0


def mobcheck_horizon(scenario: Scenario) -> float:
    """Worst-case completion time ``min(T, T_loc)`` at which range is checked."""
    return min(scenario.task.deadline_T, local_compute_time(scenario.task, scenario.vehicle))


def mobcheck_filter(scenario: Scenario) -> tuple[RsuProfile, ...]:
    """Keep the RSUs still within range at the worst-case completion time.

    Distance is convex in t, so an RSU in range at both t=0 and at the
    horizon stays in range over the whole interval.
    """
    t_check = mobcheck_horizon(scenario)
    xi = scenario.params.comm_range_xi
    return tuple(r for r in scenario.rsus if distance_to(scenario.vehicle, r, t_check) <= xi)


def unit_cost(rsu: RsuProfile, vehicle: VehicleState, params: SystemParams, m: int) -> float:
    """Seconds for ``rsu`` to receive and process one Gbit while sharing bandwidth m ways."""
    rate = transmission_rate(rsu.eta_lin, distance_to(vehicle, rsu, 0.0), params.bandwidth_B, m)
    return rsu.beta + 1.0 / rate


def unit_tx_costs(rsus: Sequence[RsuProfile], vehicle: VehicleState,
                  params: SystemParams) -> np.ndarray:
    """Per-RSU transmission cost at full bandwidth, ``1 / R_i(0)`` with m = 1.

    ``c_i(m) = beta_i + m * tx_i`` for every sharing count m.
    """
    if not rsus:
        return np.empty(0)
    xs = np.array([r.x for r in rsus]) - vehicle.x0
    ys = np.array([r.y for r in rsus]) - vehicle.y0
    d2 = xs * xs + ys * ys
    if np.any(d2 <= 0):
        raise ValueError("an RSU coincides with the vehicle (degenerate geometry)")
    eta = np.array([r.eta_lin for r in rsus])
    return 1.0 / (params.bandwidth_B * np.log2(1.0 + eta / d2))
