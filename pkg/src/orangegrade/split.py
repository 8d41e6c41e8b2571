"""Deterministic stratified train/test split."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .domain import Dataset, Grade
from .rng import derive_seed, shuffled


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction <= 1:
            raise ValueError(f"train_fraction must be in (0, 1], got {self.train_fraction}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SplitResult:
    train: Dataset
    test: Dataset


def train_count(fraction, n: int) -> int:
    """round_half_up(fraction * n), evaluated on the decimal value of ``fraction``.

    0.7 * 5 must give 4, so the float is read back through its shortest repr
    instead of its binary expansion.
    """
    exact = Fraction(repr(float(fraction))) * n
    return int((exact + Fraction(1, 2)).__floor__())


def stratified_split(dataset: Dataset, spec: SplitSpec) -> SplitResult:
    """Per class: seeded shuffle, first ``train_count`` samples go to train.

    Output order is class order (good, bad, undefined), then shuffled order
    within each class.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot split an empty dataset")
    train, test = [], []
    for grade in Grade:
        members = [s for s in dataset if s.label == grade]
        members = shuffled(members, derive_seed(spec.seed, int(grade)))
        k = train_count(spec.train_fraction, len(members))
        train += members[:k]
        test += members[k:]
    return SplitResult(Dataset(train), Dataset(test))
