import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orangegrade.collage import (
    CollageLayout, ViewIndexOutOfRange, build_mosaic, compose_collage, select_single_view,
)
from orangegrade.domain import Grade, OrangeSample

from conftest import solid

RGB = [(255, 0, 0), (0, 255, 0), (0, 0, 255)]


def sample(views, id="o1", label=Grade.BAD):
    return OrangeSample(id, views, label)


def test_default_output_is_2500x300_for_eight_views():
    views = [solid((10 * k, 0, 0), 300, 300) for k in range(8)]
    c = compose_collage(sample(views))
    assert c.pixels.shape == (300, 2500, 3)
    assert (c.source_id, c.view_count) == ("o1", 8)


def test_single_gray_view_fills_output():
    c = compose_collage(sample([solid((128, 128, 128), 300, 300)]))
    assert c.pixels.shape == (300, 2500, 3)
    assert (c.pixels == 128).all()


def test_tile_colors_by_position_nearest_no_final_resize():
    layout = CollageLayout(tile_size=10, final_width=30, final_height=10, interpolation="nearest")
    c = compose_collage(sample([solid(col, 7, 13) for col in RGB]), layout)
    for k, col in enumerate(RGB):
        assert tuple(c.pixels[5, 10 * k + 5]) == col
    # every pixel of tile k is colour k
    for k, col in enumerate(RGB):
        assert (c.pixels[:, 10 * k:10 * (k + 1)] == col).all()


def test_tile_colors_after_stretch():
    layout = CollageLayout(tile_size=10, final_width=90, final_height=20, interpolation="nearest")
    c = compose_collage(sample([solid(col) for col in RGB]), layout)
    # mosaic 30 wide stretched x3: tile k spans output columns [30k, 30k+30)
    for k, col in enumerate(RGB):
        assert tuple(c.pixels[10, 30 * k + 15]) == col


def test_grid_rows_and_padding():
    layout = CollageLayout(rows=2, tile_size=4, final_width=8, final_height=8,
                           interpolation="nearest", pad_color=(9, 9, 9))
    c = compose_collage(sample([solid(col) for col in RGB]), layout)
    assert tuple(c.pixels[1, 1]) == RGB[0]
    assert tuple(c.pixels[1, 5]) == RGB[1]
    assert tuple(c.pixels[5, 1]) == RGB[2]
    assert (c.pixels[4:, 4:] == 9).all()


def test_pad_to_final_keeps_aspect():
    layout = CollageLayout(tile_size=300, pad_to_final=True, interpolation="nearest",
                           pad_color=(1, 2, 3))
    c = compose_collage(sample([solid((128, 128, 128), 300, 300)]), layout)
    assert c.pixels.shape == (300, 2500, 3)
    assert (c.pixels[:, :300] == 128).all()
    assert (c.pixels[:, 300:] == (1, 2, 3)).all()


def test_pad_to_final_shrinks_wide_mosaic():
    layout = CollageLayout(tile_size=10, final_width=40, final_height=10, pad_to_final=True,
                           interpolation="nearest")
    c = compose_collage(sample([solid(RGB[k % 3]) for k in range(8)]), layout)
    # 80x10 mosaic scaled by 1/2 -> 40x5 on top, pad below
    assert c.pixels.shape == (10, 40, 3)
    assert (c.pixels[5:] == 0).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]),
       st.booleans())
def test_output_dims_property(n, seed, rows, pad):
    rng = np.random.default_rng(seed)
    views = [rng.integers(0, 256, (rng.integers(1, 40), rng.integers(1, 40), 3), dtype=np.uint8)
             for _ in range(n)]
    layout = CollageLayout(rows=rows, tile_size=16, final_width=250, final_height=30,
                           pad_to_final=pad)
    assert compose_collage(sample(views), layout).pixels.shape == (30, 250, 3)


def test_permuting_views_permutes_tiles():
    layout = CollageLayout(tile_size=6, final_width=18, final_height=6, interpolation="nearest")
    views = [solid(c) for c in RGB]
    perm = [2, 0, 1]
    a = compose_collage(sample(views), layout).pixels
    b = compose_collage(sample([views[i] for i in perm]), layout).pixels
    for slot, src in enumerate(perm):
        assert (b[:, 6 * slot:6 * slot + 6] == a[:, 6 * src:6 * src + 6]).all()


def test_deterministic():
    rng = np.random.default_rng(3)
    views = [rng.integers(0, 256, (50, 40, 3), dtype=np.uint8) for _ in range(5)]
    a = compose_collage(sample(views), CollageLayout.reduced(32))
    b = compose_collage(sample(views), CollageLayout.reduced(32))
    assert a.pixels.tobytes() == b.pixels.tobytes()


def test_select_single_view():
    views = [solid((k, k, k)) for k in range(6)]
    s = sample(views)
    one = select_single_view(s, 0)
    assert (one.id, one.label, one.num_views) == (s.id, s.label, 1)
    assert np.array_equal(one.views[0], views[0])
    solo = sample([views[3]])
    assert select_single_view(solo, 0) == solo
    with pytest.raises(ViewIndexOutOfRange) as e:
        select_single_view(s, 6)
    assert (e.value.index, e.value.available) == (6, 6)


def test_single_view_collage_matches_handbuilt():
    rng = np.random.default_rng(0)
    views = [rng.integers(0, 256, (40, 40, 3), dtype=np.uint8) for _ in range(4)]
    layout = CollageLayout.reduced(32)
    a = compose_collage(select_single_view(sample(views), 2), layout)
    b = compose_collage(sample([views[2]]), layout)
    assert a.pixels.tobytes() == b.pixels.tobytes()


def test_mosaic_geometry():
    m = build_mosaic([solid(0)] * 5, CollageLayout(rows=2, tile_size=3))
    assert m.shape == (6, 9, 3)


def test_layout_validation():
    with pytest.raises(ValueError):
        CollageLayout(rows=0)
    with pytest.raises(ValueError):
        CollageLayout(interpolation="bicubic")
    with pytest.raises(ValueError):
        CollageLayout(pad_color=(0, 0, 300))
