"""Node feature matrices: canonical row order and feature scaling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..vec_model import VEHICLE_ID, GenConfig, RsuProfile, VehicleState, db_to_linear

N_FEATURES = 4  # x, y, beta, eta_lin


@dataclass
class LabeledSample:
    features: np.ndarray  # (n', 4), raw units, canonical order
    labels: np.ndarray  # (n',), 0/1, labels[0] == 1
    node_ids: tuple[int, ...]
    scenario_id: int
    tau_star: float = float("nan")

    def __post_init__(self):
        if len(self.features) != len(self.labels) or len(self.labels) != len(self.node_ids):
            raise ValueError("features, labels and node ids must have equal length")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValueError("labels must be binary")


def encode_sort(vehicle: VehicleState, rsus: Sequence[RsuProfile],
                ascending_beta: bool = True) -> tuple[np.ndarray, list[int]]:
    """Build the ``(n', 4)`` feature matrix and the node id of each row.

    Row 0 is the vehicle with its SNR entry set to 0. RSU rows follow, most
    powerful first (smallest beta) unless ``ascending_beta`` is False; ties
    go to the higher SNR, then the lower id.
    """
    sign = 1.0 if ascending_beta else -1.0
    ordered = sorted(rsus, key=lambda r: (sign * r.beta, -r.eta_lin, r.id))
    rows = [[vehicle.x0, vehicle.y0, vehicle.beta0, 0.0]]
    rows += [[r.x, r.y, r.beta, r.eta_lin] for r in ordered]
    return np.array(rows, dtype=float), [VEHICLE_ID] + [r.id for r in ordered]


def default_bounds(config: GenConfig | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature scaling bounds implied by a generator configuration."""
    config = config or GenConfig()
    p = config.params
    beta_hi = p.cycles_per_bit_b / config.f_ghz[0]
    lo = np.zeros(N_FEATURES)
    hi = np.array([p.area_side, p.area_side, beta_hi, db_to_linear(config.eta_db[1])])
    return lo, hi


def normalize(A: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map each column affinely from ``[lo, hi]`` onto ``[0, 1]``, clamping outliers."""
    out = np.clip((A - lo) / (hi - lo), 0.0, 1.0)
    out[0, 3] = 0.0
    return out
