"""Core value types: grades, views, samples, datasets and collages."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

COLLAGE_WIDTH = 2500
COLLAGE_HEIGHT = 300


class UnknownLabel(ValueError):
    def __init__(self, text, sample_id=None):
        self.text = text
        self.sample_id = sample_id
        where = f" (sample {sample_id!r})" if sample_id is not None else ""
        super().__init__(f"unknown grade label {text!r}{where}")


class Grade(enum.IntEnum):
    """Quality grade. The integer value is the class index used by models and reports."""

    GOOD = 0
    BAD = 1
    UNDEFINED = 2

    def render(self) -> str:
        return self.name.lower()

    @property
    def spanish(self) -> str:
        return _SPANISH[self]

    def __str__(self):
        return self.render()


_SPANISH = {Grade.GOOD: "bueno", Grade.BAD: "malo", Grade.UNDEFINED: "indefinido"}

_ALIASES = {g.render(): g for g in Grade}
_ALIASES.update({name: g for g, name in _SPANISH.items()})


def parse_grade(text: str) -> Grade:
    """Map an English or Spanish grade name (any case, surrounding whitespace ignored)."""
    try:
        return _ALIASES[text.strip().lower()]
    except (KeyError, AttributeError):
        raise UnknownLabel(text) from None


def as_view(pixels) -> np.ndarray:
    """Validate an RGB raster and return it as a read-only uint8 array."""
    arr = np.asarray(pixels)
    if arr.dtype != np.uint8:
        raise TypeError(f"view pixels must be uint8, got {arr.dtype}")
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"view must be H x W x 3 RGB, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"view must be non-empty, got shape {arr.shape}")
    if arr.flags.writeable:
        arr = arr.copy()
        arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class OrangeSample:
    id: str
    views: tuple
    label: Grade

    def __post_init__(self):
        if not self.id:
            raise ValueError("sample id must be non-empty")
        views = tuple(as_view(v) for v in self.views)
        if not views:
            raise ValueError(f"sample {self.id!r} has no views")
        object.__setattr__(self, "views", views)
        object.__setattr__(self, "label", Grade(self.label))

    @property
    def num_views(self) -> int:
        return len(self.views)

    def __eq__(self, other):
        if not isinstance(other, OrangeSample):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and len(self.views) == len(other.views)
            and all(np.array_equal(a, b) for a, b in zip(self.views, other.views))
        )

    __hash__ = None


@dataclass(frozen=True)
class Dataset:
    samples: tuple = ()

    def __post_init__(self):
        samples = tuple(self.samples)
        seen = set()
        for s in samples:
            if s.id in seen:
                raise ValueError(f"duplicate sample id {s.id!r}")
            seen.add(s.id)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def labels(self) -> np.ndarray:
        return np.array([int(s.label) for s in self.samples], dtype=np.int64)


def class_counts(dataset: Dataset) -> dict[Grade, int]:
    counts = {g: 0 for g in Grade}
    for s in dataset:
        counts[s.label] += 1
    return counts


@dataclass(frozen=True, eq=False)
class Collage:
    """The single composed RGB image for one fruit."""

    pixels: np.ndarray
    source_id: str
    view_count: int

    def __post_init__(self):
        object.__setattr__(self, "pixels", as_view(self.pixels))
        if self.view_count < 1:
            raise ValueError("view_count must be positive")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]
