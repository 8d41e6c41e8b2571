"""Procedural multi-view "orange" datasets.

Every sample is a shaded orange disc on a dark background, seen from
``views_per_sample`` rotations. Blemishes are dark irregular spots stamped on
individual views, so at full concentration no single view carries all of a
fruit's evidence. Good fruit are clean, undefined fruit carry one or two
small spots, bad fruit carry two to six spots of any size.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import Dataset, Grade, OrangeSample

PUBLISHED_MIX = (111 / 452, 294 / 452, 47 / 452)

# luminance below this inside the disc only ever comes from a blemish
BLEMISH_LUMA = 70.0

_BACKGROUND = np.array([18.0, 18.0, 22.0])
_PEEL = np.array([236.0, 138.0, 32.0])
_BLEMISH = np.array([52.0, 34.0, 20.0])


@dataclass(frozen=True)
class SynthConfig:
    num_samples: int
    views_per_sample: int = 8
    view_size: int = 300
    class_mix: tuple = PUBLISHED_MIX
    blemish_counts: dict = field(
        default_factory=lambda: {Grade.GOOD: (0, 0), Grade.BAD: (2, 6), Grade.UNDEFINED: (1, 2)}
    )
    blemish_radius: tuple | None = None
    single_view_concentration: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.views_per_sample < 1:
            raise ValueError("views_per_sample must be >= 1")
        if self.view_size < 16:
            raise ValueError("view_size must be >= 16")
        mix = tuple(float(m) for m in self.class_mix)
        if len(mix) != 3 or min(mix) < 0 or abs(sum(mix) - 1) > 1e-9:
            raise ValueError(f"class_mix must be 3 non-negative reals summing to 1, got {mix}")
        object.__setattr__(self, "class_mix", mix)
        counts = {Grade(k): tuple(v) for k, v in self.blemish_counts.items()}
        for g in Grade:
            lo, hi = counts.get(g, (None, None))
            if lo is None or not 0 <= lo <= hi:
                raise ValueError(f"invalid blemish count range for {g}: {counts.get(g)}")
        object.__setattr__(self, "blemish_counts", counts)
        if self.blemish_radius is None:
            # 8..30 px at the default 300 px view, scaled for other sizes
            scale = self.view_size / 300
            object.__setattr__(self, "blemish_radius", (max(1, round(8 * scale)), max(1, round(30 * scale))))
        lo, hi = self.blemish_radius
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid blemish radius range {self.blemish_radius}")
        if 2 * hi > self.disc_radius:
            raise ValueError("blemish radius too large for the view size")
        if not 0 <= self.single_view_concentration <= 1:
            raise ValueError("single_view_concentration must be in [0, 1]")

    @property
    def disc_radius(self) -> float:
        return 0.4 * self.view_size

    def radius_range(self, grade: Grade) -> tuple[int, int]:
        lo, hi = self.blemish_radius
        if grade == Grade.UNDEFINED:
            return lo, lo + (hi - lo) // 3
        return lo, hi

    def views_per_blemish(self) -> int:
        return 1 + round((1 - self.single_view_concentration) * (self.views_per_sample - 1))


def apportion(total: int, mix) -> list[int]:
    """Largest-remainder apportionment of ``total`` items by ``mix``."""
    quotas = [total * m for m in mix]
    counts = [int(q) for q in quotas]
    order = sorted(range(len(mix)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return counts


@dataclass(frozen=True)
class Blemish:
    view: int
    cx: float
    cy: float
    radius: float
    aspect: float
    angle: float
    wobble: tuple


def _grid(size):
    c = (size - 1) / 2
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    return xx - c, yy - c


def _render_fruit(cfg, rng):
    """Per-sample rendering parameters shared by all views."""
    return {
        "tint": _PEEL * rng.uniform(0.9, 1.05, size=3),
        "freqs": rng.uniform(0.05, 0.25, size=(4, 2)) * rng.choice([-1, 1], size=(4, 2)),
        "phases": rng.uniform(0, 2 * np.pi, size=4),
        "angles": rng.uniform(0, 2 * np.pi, size=cfg.views_per_sample),
    }


def _render_view(cfg, fruit, view_idx, blemishes):
    S = cfg.view_size
    R = cfg.disc_radius
    dx, dy = _grid(S)
    r2 = (dx * dx + dy * dy) / (R * R)
    inside = r2 <= 1.0

    theta = fruit["angles"][view_idx]
    rx = np.cos(theta) * dx - np.sin(theta) * dy
    ry = np.sin(theta) * dx + np.cos(theta) * dy
    texture = sum(
        np.sin(f[0] * rx + f[1] * ry + p) for f, p in zip(fruit["freqs"], fruit["phases"])
    ) / 4.0
    shade = 1.0 - 0.3 * r2 + 0.04 * texture
    img = np.where(inside[..., None], fruit["tint"] * shade[..., None], _BACKGROUND)

    for b in blemishes:
        if b.view != view_idx:
            continue
        ex, ey = dx - b.cx, dy - b.cy
        u = np.cos(b.angle) * ex + np.sin(b.angle) * ey
        v = -np.sin(b.angle) * ex + np.cos(b.angle) * ey
        rho = np.hypot(u / b.aspect, v * b.aspect)
        phi = np.arctan2(v, u)
        edge = b.radius * (1.0 + sum(a * np.sin(k * phi + p) for k, a, p in b.wobble))
        spot = (rho <= edge) & inside
        img[spot] = _BLEMISH * (0.85 + 0.15 * np.clip(rho[spot] / b.radius, 0, 1))[:, None]
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _place_blemishes(cfg, grade, rng):
    lo, hi = cfg.blemish_counts[grade]
    count = int(rng.integers(lo, hi + 1))
    V = cfg.views_per_sample
    span = cfg.views_per_blemish()
    order = list(rng.permutation(V))
    rlo, rhi = cfg.radius_range(grade)
    out = []
    for i in range(count):
        if not order:
            order = list(rng.permutation(V))
        first = int(order.pop(0))
        radius = float(rng.uniform(rlo, rhi))
        # keep the whole spot (including wobble) inside the disc
        reach = cfg.disc_radius - 1.7 * radius
        dist = reach * np.sqrt(rng.uniform(0, 1))
        ang = rng.uniform(0, 2 * np.pi)
        aspect = float(rng.uniform(1.0, 1.3))
        wobble = tuple(
            (int(k), float(rng.uniform(0.03, 0.12)), float(rng.uniform(0, 2 * np.pi)))
            for k in (2, 3, 5)
        )
        for j in range(span):
            out.append(Blemish((first + j) % V, dist * np.cos(ang), dist * np.sin(ang),
                               radius, aspect, float(rng.uniform(0, np.pi)), wobble))
    return count, out


def generate_sample(cfg: SynthConfig, index: int, grade: Grade) -> tuple[OrangeSample, int]:
    """Render sample ``index``; also returns how many blemishes it was given."""
    rng = np.random.default_rng([cfg.seed, index])
    fruit = _render_fruit(cfg, rng)
    count, blemishes = _place_blemishes(cfg, grade, rng)
    views = [_render_view(cfg, fruit, v, blemishes) for v in range(cfg.views_per_sample)]
    return OrangeSample(f"s{index:05d}", views, grade), count


def assign_labels(cfg: SynthConfig) -> list[Grade]:
    counts = apportion(cfg.num_samples, cfg.class_mix)
    labels = [g for g, n in zip(Grade, counts) for _ in range(n)]
    order = np.random.default_rng([cfg.seed]).permutation(len(labels))
    return [labels[i] for i in order]


def generate(cfg: SynthConfig) -> Dataset:
    labels = assign_labels(cfg)
    return Dataset([generate_sample(cfg, i, g)[0] for i, g in enumerate(labels)])


def blemish_mask(view: np.ndarray) -> np.ndarray:
    """Pixels darker than any clean peel pixel (background excluded by colour)."""
    px = view.astype(np.float64)
    luma = 0.299 * px[..., 0] + 0.587 * px[..., 1] + 0.114 * px[..., 2]
    return (luma < BLEMISH_LUMA) & (px[..., 0] > px[..., 2] + 15)
