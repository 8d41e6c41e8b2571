"""Supervised training over composed collages."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .collage import CollageLayout, compose_collage, select_single_view
from .domain import Dataset, Grade
from .model import ModelHandle, ShapeMismatch, collage_batch
from .rng import derive_seed, shuffled

log = logging.getLogger(__name__)

OPTIMIZERS = ("adam", "sgd_momentum")


class EmptyTrainSet(ValueError):
    pass


class NonFiniteLoss(FloatingPointError):
    def __init__(self, epoch, batch, loss):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss} at epoch {epoch}, batch {batch}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 8
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    weight_decay: float = 1e-4
    seed: int = 0
    single_view: int | None = None
    checkpoint_dir: str | None = None
    class_weighting: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.single_view is not None and self.single_view < 0:
            raise ValueError("single_view must be a non-negative view index")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    accuracy: float

    def log_line(self) -> str:
        return f"epoch={self.epoch} loss={self.loss:.6f} acc={self.accuracy:.6f}"


@dataclass
class TrainRecord:
    epochs: list

    def log_lines(self) -> list[str]:
        return [e.log_line() for e in self.epochs]

    @property
    def final_accuracy(self) -> float:
        return self.epochs[-1].accuracy


def cross_entropy(logits, targets, weights=None) -> torch.Tensor:
    """Mean over the batch of -log softmax(logits)[target], via log-sum-exp."""
    logits = torch.as_tensor(logits)
    targets = torch.as_tensor(targets, dtype=torch.long)
    shift = logits - logits.max(dim=1, keepdim=True).values.detach()
    log_probs = shift - torch.logsumexp(shift, dim=1, keepdim=True)
    nll = -log_probs.gather(1, targets[:, None])[:, 0]
    if weights is None:
        return nll.mean()
    w = torch.as_tensor(weights, dtype=logits.dtype)[targets]
    return (w * nll).sum() / w.sum()


def cross_entropy_grad(logits, targets) -> np.ndarray:
    """Closed-form gradient of the unweighted mean loss: (softmax - one_hot) / B."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=1, keepdims=True)
    p = np.exp(z)
    p /= p.sum(axis=1, keepdims=True)
    p[np.arange(len(z)), np.asarray(targets)] -= 1.0
    return p / len(z)


def class_weights(train_set: Dataset) -> torch.Tensor:
    """Inverse-frequency weights, normalised to mean 1 over present classes."""
    counts = np.bincount(train_set.labels(), minlength=len(Grade)).astype(np.float64)
    w = np.where(counts > 0, counts.sum() / np.maximum(counts, 1), 0.0)
    w *= (counts > 0).sum() / w.sum()
    return torch.tensor(w, dtype=torch.float32)


def prepare_collages(dataset: Dataset, layout: CollageLayout, single_view: int | None = None):
    out = []
    for s in dataset:
        if single_view is not None:
            s = select_single_view(s, single_view)
        out.append(compose_collage(s, layout))
    return out


def batch_tensor(model: ModelHandle, dataset: Dataset, layout: CollageLayout,
                 single_view: int | None = None) -> torch.Tensor:
    """The exact network input the trainer builds for ``dataset``."""
    return collage_batch(model, prepare_collages(dataset, layout, single_view))


def _optimizer(model: ModelHandle, config: TrainConfig):
    params = model.network.parameters()
    if config.optimizer == "adam":
        return torch.optim.Adam(params, lr=config.learning_rate, weight_decay=config.weight_decay)
    return torch.optim.SGD(params, lr=config.learning_rate, momentum=0.9,
                           weight_decay=config.weight_decay)


def train(model: ModelHandle, train_set: Dataset, layout: CollageLayout,
          config: TrainConfig) -> tuple[ModelHandle, TrainRecord]:
    """Train ``model`` in place for exactly ``config.epochs`` epochs.

    Collages are composed once up front (there is no augmentation). Each
    epoch visits the samples in a SplitMix64 shuffle seeded from
    ``(config.seed, epoch)``.
    """
    if len(train_set) == 0:
        raise EmptyTrainSet("training set is empty")
    if model.num_classes != len(Grade):
        raise ValueError(f"model must have {len(Grade)} classes, has {model.num_classes}")
    if (layout.final_height, layout.final_width) != tuple(model.input_size):
        raise ShapeMismatch(
            f"layout produces {layout.final_height}x{layout.final_width}, "
            f"model expects {model.input_size[0]}x{model.input_size[1]}"
        )

    inputs = batch_tensor(model, train_set, layout, config.single_view)
    targets = torch.as_tensor(train_set.labels())
    weights = class_weights(train_set) if config.class_weighting else None
    ckpt_dir = Path(config.checkpoint_dir) if config.checkpoint_dir else None
    if ckpt_dir:
        ckpt_dir.mkdir(parents=True, exist_ok=True)

    opt = _optimizer(model, config)
    net = model.network
    n = len(train_set)
    history = []
    with torch.random.fork_rng(devices=[]):
        # dropout masks come from the global generator
        torch.manual_seed(derive_seed(config.seed, 0xD0) & 0x7FFF_FFFF_FFFF_FFFF)
        for epoch in range(1, config.epochs + 1):
            net.train()
            order = shuffled(range(n), derive_seed(config.seed, epoch))
            total_loss, correct = 0.0, 0
            for b in range(math.ceil(n / config.batch_size)):
                idx = torch.as_tensor(order[b * config.batch_size:(b + 1) * config.batch_size])
                logits = net(inputs[idx])
                loss = cross_entropy(logits, targets[idx], weights)
                if not torch.isfinite(loss):
                    raise NonFiniteLoss(epoch, b, loss.item())
                opt.zero_grad()
                loss.backward()
                opt.step()
                total_loss += loss.item() * len(idx)
                correct += int((logits.argmax(1) == targets[idx]).sum())
            stats = EpochStats(epoch, total_loss / n, correct / n)
            history.append(stats)
            log.info(stats.log_line())
            if ckpt_dir:
                model.save(ckpt_dir / f"epoch_{epoch}.weights")
    net.eval()
    return model, TrainRecord(history)
