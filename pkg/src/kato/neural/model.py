"""Selection models over variable-size node sets.

Three architectures share one interface: ``forward(A, model) -> (p, cache)``
and ``backward(cache, labels) -> grads``, where ``A`` is a normalized
``(n', 4)`` feature matrix and ``p`` holds one selection probability per row.

``kato``
    Keys aggregate growing prefixes of the sorted rows (cumulative row sums),
    the single query is the vehicle row, and a shared scalar affine map plus a
    sigmoid turns the scaled dot-product scores into probabilities.
``standard_attention``
    Plain keys and queries for every row; the ``(n', n')`` score matrix is
    pooled over the query axis by averaging.
``perceptron``
    A 4-5-1 ReLU network applied to each row independently.

Gradients are for the per-sample loss ``mean_i BCE(p_i, y_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..vec_model import VEHICLE_ID, RsuProfile, VehicleState
from .features import N_FEATURES, default_bounds, encode_sort, normalize

ARCHS = ("kato", "standard_attention", "perceptron")
ARCH_ALIASES = {"sa": "standard_attention", "mlp": "perceptron", "kato": "kato"}
MLP_HIDDEN = 5
SELECT_THRESHOLD = 0.5


def canonical_arch(arch: str) -> str:
    arch = ARCH_ALIASES.get(arch, arch)
    if arch not in ARCHS:
        raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHS}")
    return arch


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class SelectionModel:
    arch: str
    params: dict[str, np.ndarray]
    h: int = 5
    norm_lo: np.ndarray = field(default_factory=lambda: default_bounds()[0])
    norm_hi: np.ndarray = field(default_factory=lambda: default_bounds()[1])
    ascending_beta: bool = True
    train_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.arch = canonical_arch(self.arch)
        if self.h < 1:
            raise ValueError("hidden width must be at least 1")
        self.norm_lo = np.asarray(self.norm_lo, dtype=float)
        self.norm_hi = np.asarray(self.norm_hi, dtype=float)
        if not np.all(self.norm_lo < self.norm_hi):
            raise ValueError("normalization bounds need lo < hi for every feature")

    @property
    def n_params(self) -> int:
        return int(sum(np.size(v) for v in self.params.values()))

    def copy(self) -> SelectionModel:
        return SelectionModel(self.arch, {k: np.array(v, copy=True) for k, v in self.params.items()},
                              self.h, self.norm_lo.copy(), self.norm_hi.copy(),
                              self.ascending_beta, dict(self.train_meta))

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "arch": self.arch,
            "h": self.h,
            "params": {k: np.asarray(v).tolist() for k, v in self.params.items()},
            "norm_lo": self.norm_lo.tolist(),
            "norm_hi": self.norm_hi.tolist(),
            "ascending_beta": self.ascending_beta,
            "train_meta": self.train_meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SelectionModel:
        return cls(arch=d["arch"], h=int(d["h"]),
                   params={k: np.asarray(v, dtype=float) for k, v in d["params"].items()},
                   norm_lo=np.asarray(d["norm_lo"]), norm_hi=np.asarray(d["norm_hi"]),
                   ascending_beta=bool(d.get("ascending_beta", True)),
                   train_meta=d.get("train_meta", {}))


def param_shapes(arch: str, h: int = 5) -> dict[str, tuple[tuple[int, ...], int]]:
    """Parameter name -> (shape, fan-in)."""
    arch = canonical_arch(arch)
    if arch == "perceptron":
        return {"W1": ((N_FEATURES, MLP_HIDDEN), N_FEATURES), "b1": ((MLP_HIDDEN,), N_FEATURES),
                "W2": ((MLP_HIDDEN,), MLP_HIDDEN), "b2": ((), MLP_HIDDEN)}
    return {"W_K": ((N_FEATURES, h), N_FEATURES), "W_Q": ((N_FEATURES, h), N_FEATURES),
            "dec_w": ((), 1), "dec_b": ((), 1)}


def init_model(arch: str = "kato", h: int = 5, seed: int = 0, zero: bool = False,
               bounds: tuple[np.ndarray, np.ndarray] | None = None,
               ascending_beta: bool = True) -> SelectionModel:
    """Seeded uniform(-0.5, 0.5) / sqrt(fan_in) initialization, or all zeros."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, (shape, fan_in) in param_shapes(arch, h).items():
        if zero:
            params[name] = np.zeros(shape)
        else:
            params[name] = np.asarray(rng.uniform(-0.5, 0.5, size=shape) / math.sqrt(fan_in))
    lo, hi = bounds if bounds is not None else default_bounds()
    return SelectionModel(arch, params, h, np.asarray(lo, float), np.asarray(hi, float),
                          ascending_beta)


def kato_forward(A: np.ndarray, model: SelectionModel):
    P = model.params
    S = np.cumsum(A, axis=0)
    K = S @ P["W_K"]
    q = A[0] @ P["W_Q"]
    e = K @ q / math.sqrt(model.h)
    p = sigmoid(P["dec_w"] * e + P["dec_b"])
    return p, {"arch": "kato", "A": A, "S": S, "K": K, "q": q, "e": e, "p": p,
               "params": P, "h": model.h}


def _kato_backward(c, dz):
    P, rh = c["params"], 1.0 / math.sqrt(c["h"])
    de = P["dec_w"] * dz
    dq = (c["K"].T @ de) * rh
    dK = np.outer(de, c["q"]) * rh
    return {"W_K": c["S"].T @ dK, "W_Q": np.outer(c["A"][0], dq),
            "dec_w": np.asarray(dz @ c["e"]), "dec_b": np.asarray(dz.sum())}


def sa_forward(A: np.ndarray, model: SelectionModel):
    P = model.params
    K = A @ P["W_K"]
    Qm = A @ P["W_Q"]
    E = Qm @ K.T / math.sqrt(model.h)
    s = E.mean(axis=0)
    p = sigmoid(P["dec_w"] * s + P["dec_b"])
    return p, {"arch": "standard_attention", "A": A, "K": K, "Qm": Qm, "E": E, "s": s,
               "p": p, "params": P, "h": model.h}


def _sa_backward(c, dz):
    P, rh = c["params"], 1.0 / math.sqrt(c["h"])
    n = len(dz)
    ds = P["dec_w"] * dz
    dE = np.broadcast_to(ds / n, (n, n))
    dQm = dE @ c["K"] * rh
    dK = dE.T @ c["Qm"] * rh
    A = c["A"]
    return {"W_K": A.T @ dK, "W_Q": A.T @ dQm,
            "dec_w": np.asarray(dz @ c["s"]), "dec_b": np.asarray(dz.sum())}


def mlp_forward(A: np.ndarray, model: SelectionModel):
    P = model.params
    H = A @ P["W1"] + P["b1"]
    R = np.maximum(H, 0.0)
    p = sigmoid(R @ P["W2"] + P["b2"])
    return p, {"arch": "perceptron", "A": A, "H": H, "R": R, "p": p, "params": P}


def _mlp_backward(c, dz):
    P = c["params"]
    dH = np.outer(dz, P["W2"]) * (c["H"] > 0)
    return {"W1": c["A"].T @ dH, "b1": dH.sum(axis=0),
            "W2": c["R"].T @ dz, "b2": np.asarray(dz.sum())}


_FORWARD = {"kato": kato_forward, "standard_attention": sa_forward, "perceptron": mlp_forward}
_BACKWARD = {"kato": _kato_backward, "standard_attention": _sa_backward,
             "perceptron": _mlp_backward}


def forward(A: np.ndarray, model: SelectionModel):
    return _FORWARD[model.arch](A, model)


def backward(cache: dict, labels: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic gradient of ``mean_i BCE(p_i, y_i)`` for the forward pass in ``cache``."""
    p = cache["p"]
    dz = (p - labels) / len(p)
    return _BACKWARD[cache["arch"]](cache, dz)


def node_probabilities(model: SelectionModel, vehicle: VehicleState,
                       rsus: Sequence[RsuProfile]) -> tuple[np.ndarray, list[int]]:
    A, node_ids = encode_sort(vehicle, rsus, model.ascending_beta)
    p, _ = forward(normalize(A, model.norm_lo, model.norm_hi), model)
    return p, node_ids


def select_from_probabilities(p: Sequence[float], node_ids: Sequence[int]) -> tuple[int, ...]:
    """Vehicle plus every RSU with ``p >= 0.5``, ids ascending."""
    chosen = {int(i) for pi, i in zip(p, node_ids) if pi >= SELECT_THRESHOLD}
    chosen.discard(VEHICLE_ID)
    return (VEHICLE_ID,) + tuple(sorted(chosen))


def predict_selection(model: SelectionModel, vehicle: VehicleState,
                      surviving_rsus: Sequence[RsuProfile]) -> tuple[int, ...]:
    p, node_ids = node_probabilities(model, vehicle, surviving_rsus)
    return select_from_probabilities(p, node_ids)
