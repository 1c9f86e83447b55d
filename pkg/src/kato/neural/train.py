"""BCE loss, Adam, and the mini-batch training loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .features import LabeledSample, normalize
from .model import SELECT_THRESHOLD, SelectionModel, backward, forward, init_model

log = logging.getLogger(__name__)

P_CLAMP = 1e-12


def bce_loss(p, labels) -> float:
    p = np.clip(np.asarray(p, dtype=float), P_CLAMP, 1.0 - P_CLAMP)
    y = np.asarray(labels, dtype=float)
    if p.shape != y.shape:
        raise ValueError("probabilities and labels differ in length")
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))


@dataclass
class AdamState:
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> AdamState:
        return cls(0, {k: np.zeros_like(v) for k, v in params.items()},
                   {k: np.zeros_like(v) for k, v in params.items()})


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState,
              lr: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update; inputs are left untouched."""
    t = state.t + 1
    new_params, new_m, new_v = {}, {}, {}
    for k, theta in params.items():
        g = grads[k]
        m = beta1 * state.m[k] + (1.0 - beta1) * g
        v = beta2 * state.v[k] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[k] = np.asarray(theta - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m[k], new_v[k] = m, v
    return new_params, AdamState(t, new_m, new_v)


def sample_loss_and_grad(model: SelectionModel, sample: LabeledSample):
    A = normalize(sample.features, model.norm_lo, model.norm_hi)
    p, cache = forward(A, model)
    return bce_loss(p, sample.labels), backward(cache, sample.labels)


def batch_gradients(model: SelectionModel, samples: Sequence[LabeledSample],
                    reduction: str = "mean") -> tuple[float, dict[str, np.ndarray]]:
    total_loss = 0.0
    total = {k: np.zeros_like(v) for k, v in model.params.items()}
    for s in samples:
        loss, g = sample_loss_and_grad(model, s)
        total_loss += loss
        for k in total:
            total[k] += g[k]
    if reduction == "sum":
        return total_loss, total
    n = len(samples)
    return total_loss / n, {k: v / n for k, v in total.items()}


def dataset_loss(model: SelectionModel, samples: Sequence[LabeledSample]) -> float:
    losses = [bce_loss(forward(normalize(s.features, model.norm_lo, model.norm_hi), model)[0],
                       s.labels) for s in samples]
    return float(np.mean(losses))


def selection_accuracy(model: SelectionModel, samples: Sequence[LabeledSample]) -> float:
    """Fraction of RSU rows whose thresholded prediction matches the label."""
    hit = count = 0
    for s in samples:
        p, _ = forward(normalize(s.features, model.norm_lo, model.norm_hi), model)
        pred = p[1:] >= SELECT_THRESHOLD
        hit += int(np.sum(pred == (s.labels[1:] == 1)))
        count += len(pred)
    return hit / count if count else 1.0


@dataclass(frozen=True)
class TrainConfig:
    arch: str = "kato"
    epochs: int = 20
    lr: float = 0.001
    batch: int = 64
    seed: int = 0
    h: int = 5


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)  # index 0 = before training
    val_loss: list[float] = field(default_factory=list)
    best_epoch: int = 0


def train(train_set: Sequence[LabeledSample], val_set: Sequence[LabeledSample],
          config: TrainConfig = TrainConfig(), model: SelectionModel | None = None,
          ) -> tuple[SelectionModel, TrainHistory]:
    """Mini-batch Adam on the mean per-sample BCE; returns the best-validation weights.

    Epoch 0 in the history is the untouched initial model. Variable node
    counts are handled by running forward/backward one sample at a time and
    averaging the gradients over the batch.
    """
    if not train_set:
        raise ValueError("empty training set")
    val_set = val_set or train_set
    rng = np.random.default_rng(config.seed)
    if model is None:
        model = init_model(config.arch, h=config.h, seed=int(rng.integers(2**31)))
    else:
        model = model.copy()
    state = AdamState.zeros_like(model.params)

    hist = TrainHistory([dataset_loss(model, train_set)], [dataset_loss(model, val_set)])
    best = model.copy()
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        for start in range(0, len(order), config.batch):
            batch = [train_set[i] for i in order[start:start + config.batch]]
            _, grads = batch_gradients(model, batch)
            model.params, state = adam_step(model.params, grads, state, lr=config.lr)
        hist.train_loss.append(dataset_loss(model, train_set))
        hist.val_loss.append(dataset_loss(model, val_set))
        log.info("epoch %d train %.5f val %.5f", epoch, hist.train_loss[-1], hist.val_loss[-1])
        if hist.val_loss[-1] < hist.val_loss[hist.best_epoch]:
            hist.best_epoch = epoch
            best = model.copy()

    best.train_meta = {"seed": config.seed, "epochs": config.epochs, "lr": config.lr,
                       "batch": config.batch, "best_epoch": hist.best_epoch,
                       "val_loss": hist.val_loss, "train_loss": hist.train_loss,
                       "n_train": len(train_set)}
    return best, hist
