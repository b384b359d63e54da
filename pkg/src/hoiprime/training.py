"""Class weighting, the joint two-branch loss, and the training loop.

Both heads train with weighted binary cross-entropy over independent
predicates; the total loss is their sum (just the visual term when
priming is off). The optimizer is plain SGD with the stepped schedule
lr(epoch) = lr0 * decay_factor ** floor(epoch / decay_every); batches
use mean reduction so the learning rate is batch-size independent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, TrainingDivergedError
from .model import Model
from .pairing import HoiPair
from .seeding import derive_seed
from .tensor import Tensor, add, backward, sgd_step, weighted_bce


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    lr0: float = 0.01
    decay_every: int = 3
    decay_factor: float = 0.1
    batch_size: int = 32
    seed: int = 0
    horizontal_flip: bool = False

    def lr_at(self, epoch: int) -> float:
        return self.lr0 * self.decay_factor ** (epoch // self.decay_every)


# lr0 0.1 is the full-scale schedule; desk-size nets train from scratch
# with the same decay shape at a tenth of it
PAPER_PRESET = TrainConfig(lr0=0.1)
DESK_PRESET = TrainConfig(lr0=0.01)


@dataclass
class LossReport:
    """Per-step losses; j1 is absent when priming (and its head) is off."""

    j1: Tensor | None
    j2: Tensor
    total: Tensor

    @property
    def j1_value(self) -> float | None:
        return None if self.j1 is None else self.j1.item()

    @property
    def j2_value(self) -> float:
        return self.j2.item()

    @property
    def total_value(self) -> float:
        return self.total.item()


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    j1: float
    j2: float
    total: float
    lr: float


def class_weights(counts) -> np.ndarray:
    """Inverse-frequency predicate weights, normalized to mean 1.

    Zero counts fall back to a floor of one instance, which hands the
    never-seen predicate the largest weight.
    """
    arr = np.asarray(counts, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ArgumentError("counts must be a non-empty vector")
    if np.any(arr < 0):
        raise ArgumentError("counts must be non-negative")
    if not np.any(arr > 0):
        raise ArgumentError("at least one predicate needs a positive count")
    inv = 1.0 / np.maximum(arr, 1.0)
    return inv / inv.mean()


def joint_loss(p1: Tensor | None, p2: Tensor, target, weights,
               variant) -> LossReport:
    """Weighted BCE on each available head; total is their sum."""
    j2 = weighted_bce(p2, target, weights)
    if variant.priming:
        if p1 is None:
            raise ArgumentError("priming variant forwarded without prior logits")
        j1 = weighted_bce(p1, target, weights)
        return LossReport(j1=j1, j2=j2, total=add(j1, j2))
    return LossReport(j1=None, j2=j2, total=j2)


def batch_arrays(pairs: list[HoiPair], indices, dtype=np.float32) -> dict[str, np.ndarray]:
    """Stack one batch of materialized pairs into model-ready arrays."""
    chosen = [pairs[i] for i in indices]
    out = {
        "ip": np.stack([p.ip for p in chosen]).astype(dtype),
        "crop": np.stack([p.union_crop for p in chosen]).astype(dtype),
        "wo": np.stack([p.w_o for p in chosen]).astype(dtype),
        "fh": np.stack([p.human.feature for p in chosen]).astype(dtype),
        "fo": np.stack([p.object.feature for p in chosen]).astype(dtype),
    }
    if chosen[0].target is not None:
        out["target"] = np.stack([p.target for p in chosen]).astype(dtype)
    return out


def _flip_batch(batch: dict[str, np.ndarray], rng: np.random.Generator) -> None:
    take = rng.random(batch["ip"].shape[0]) < 0.5
    batch["ip"][take] = batch["ip"][take, :, :, ::-1]
    batch["crop"][take] = batch["crop"][take, :, :, ::-1]


def train(dataset: list[HoiPair], model: Model, tc: TrainConfig,
          weights: np.ndarray | None = None) -> list[EpochStats]:
    """Train in place for tc.epochs; returns per-epoch mean losses.

    Embeddings and detector features are frozen inputs. Shuffling draws a
    fresh permutation per epoch from a seed derived from tc.seed, so a
    rerun with the same seed reproduces the loss history exactly.

    Raises TrainingDivergedError (with epoch, batch, lr) on non-finite loss.
    """
    if not dataset:
        raise ArgumentError("training dataset is empty")
    if any(p.target is None for p in dataset):
        raise ArgumentError("training pairs must carry targets")
    if weights is None:
        counts = np.stack([p.target for p in dataset]).sum(axis=0)
        weights = class_weights(counts)

    dtype = model.config.np_dtype()
    history: list[EpochStats] = []
    n = len(dataset)
    for epoch in range(tc.epochs):
        lr = tc.lr_at(epoch)
        rng = np.random.default_rng(derive_seed(tc.seed, "shuffle", epoch))
        order = rng.permutation(n)
        sums = np.zeros(3)
        n_batches = 0
        for start in range(0, n, tc.batch_size):
            batch = batch_arrays(dataset, order[start:start + tc.batch_size], dtype)
            if tc.horizontal_flip:
                _flip_batch(batch, rng)
            p1, p2 = model.forward_pairs(batch["ip"], batch["crop"], batch["wo"],
                                         batch["fh"], batch["fo"], mode="train")
            report = joint_loss(p1, p2, batch["target"], weights, model.variant)
            total = report.total_value
            if not np.isfinite(total):
                raise TrainingDivergedError(epoch, n_batches, lr)
            backward(report.total)
            sgd_step(model.parameters(), lr)
            sums += (report.j1_value or 0.0, report.j2_value, total)
            n_batches += 1
        history.append(EpochStats(
            epoch=epoch,
            j1=sums[0] / n_batches,
            j2=sums[1] / n_batches,
            total=sums[2] / n_batches,
            lr=lr,
        ))
    return history


def write_history_csv(path, history: list[EpochStats]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "j1", "j2", "total", "lr"])
        for row in history:
            writer.writerow([row.epoch, repr(row.j1), repr(row.j2),
                             repr(row.total), repr(row.lr)])
