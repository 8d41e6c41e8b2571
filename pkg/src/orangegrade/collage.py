"""Compose the views of one fruit into a single fixed-size RGB image."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .domain import COLLAGE_HEIGHT, COLLAGE_WIDTH, Collage, OrangeSample

_FILTERS = {"bilinear": Image.Resampling.BILINEAR, "nearest": Image.Resampling.NEAREST}


class ViewIndexOutOfRange(IndexError):
    def __init__(self, index, available):
        self.index = index
        self.available = available
        super().__init__(f"view index {index} out of range for {available} views")


@dataclass(frozen=True)
class CollageLayout:
    """Tiling and output geometry.

    With ``pad_to_final=False`` the tiled mosaic is stretched to
    ``final_width x final_height``. With ``pad_to_final=True`` it is scaled
    to fit without changing its aspect ratio, anchored top-left, and the
    margin is filled with ``pad_color``.
    """

    rows: int = 1
    tile_size: int = 300
    final_width: int = COLLAGE_WIDTH
    final_height: int = COLLAGE_HEIGHT
    pad_color: tuple = (0, 0, 0)
    interpolation: str = "bilinear"
    pad_to_final: bool = False

    def __post_init__(self):
        for name in ("rows", "tile_size", "final_width", "final_height"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.interpolation not in _FILTERS:
            raise ValueError(f"interpolation must be one of {sorted(_FILTERS)}")
        color = tuple(int(c) for c in self.pad_color)
        if len(color) != 3 or not all(0 <= c <= 255 for c in color):
            raise ValueError(f"pad_color must be an RGB triple, got {self.pad_color!r}")
        object.__setattr__(self, "pad_color", color)

    @classmethod
    def reduced(cls, tile_size: int = 96, **kw) -> "CollageLayout":
        """Eight tiles wide and one tile high, e.g. 768 x 96 for ``tile_size=96``."""
        return cls(tile_size=tile_size, final_width=8 * tile_size, final_height=tile_size, **kw)

    def grid_shape(self, n: int) -> tuple[int, int]:
        return self.rows, math.ceil(n / self.rows)


def _resize(pixels: np.ndarray, width: int, height: int, interpolation: str) -> np.ndarray:
    if pixels.shape[:2] == (height, width):
        return pixels
    im = Image.fromarray(np.ascontiguousarray(pixels))
    return np.asarray(im.resize((width, height), _FILTERS[interpolation]))


def build_mosaic(views, layout: CollageLayout) -> np.ndarray:
    """Tile ``views`` left-to-right, top-to-bottom with no spacing."""
    n = len(views)
    rows, cols = layout.grid_shape(n)
    t = layout.tile_size
    mosaic = np.empty((rows * t, cols * t, 3), dtype=np.uint8)
    mosaic[:] = layout.pad_color
    for k, v in enumerate(views):
        r, c = divmod(k, cols)
        mosaic[r * t:(r + 1) * t, c * t:(c + 1) * t] = _resize(v, t, t, layout.interpolation)
    return mosaic


def compose_collage(sample: OrangeSample, layout: CollageLayout | None = None) -> Collage:
    layout = layout or CollageLayout()
    mosaic = build_mosaic(sample.views, layout)
    W, H = layout.final_width, layout.final_height
    if not layout.pad_to_final:
        out = _resize(mosaic, W, H, layout.interpolation)
    else:
        mh, mw = mosaic.shape[:2]
        scale = min(W / mw, H / mh)
        w = max(1, min(W, round(mw * scale)))
        h = max(1, min(H, round(mh * scale)))
        out = np.empty((H, W, 3), dtype=np.uint8)
        out[:] = layout.pad_color
        out[:h, :w] = _resize(mosaic, w, h, layout.interpolation)
    return Collage(out, source_id=sample.id, view_count=sample.num_views)


def select_single_view(sample: OrangeSample, index: int) -> OrangeSample:
    if not 0 <= index < sample.num_views:
        raise ViewIndexOutOfRange(index, sample.num_views)
    return OrangeSample(sample.id, (sample.views[index],), sample.label)


def save_collage(collage: Collage, path) -> None:
    from .ingest import write_view

    write_view(collage.pixels, path)
