from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orangegrade.domain import Grade, class_counts
from orangegrade.ingest import load_dataset, write_dataset
from orangegrade.synth import (
    PUBLISHED_MIX, SynthConfig, apportion, blemish_mask, generate, generate_sample,
)

SMALL = dict(view_size=64, blemish_radius=(3, 8))


def components(mask):
    """4-connected components by breadth-first flood fill."""
    seen = np.zeros_like(mask, dtype=bool)
    n = 0
    H, W = mask.shape
    for y, x in zip(*np.nonzero(mask)):
        if seen[y, x]:
            continue
        n += 1
        seen[y, x] = True
        q = deque([(y, x)])
        while q:
            cy, cx = q.popleft()
            for ny, nx in ((cy + 1, cx), (cy - 1, cx), (cy, cx + 1), (cy, cx - 1)):
                if 0 <= ny < H and 0 <= nx < W and mask[ny, nx] and not seen[ny, nx]:
                    seen[ny, nx] = True
                    q.append((ny, nx))
    return n


def test_good_samples_are_clean():
    cfg = SynthConfig(num_samples=1, seed=0)
    for i in range(5):
        s, count = generate_sample(cfg, i, Grade.GOOD)
        assert count == 0
        assert all(blemish_mask(v).sum() == 0 for v in s.views)


def test_four_blemishes_on_four_views():
    cfg = SynthConfig(num_samples=1, seed=1, blemish_counts={
        Grade.GOOD: (0, 0), Grade.BAD: (4, 4), Grade.UNDEFINED: (1, 2)})
    for i in range(3):
        s, count = generate_sample(cfg, i, Grade.BAD)
        per_view = [components(blemish_mask(v)) for v in s.views]
        assert count == 4
        assert sorted(per_view) == [0, 0, 0, 0, 1, 1, 1, 1]


def test_deterministic():
    a = generate(SynthConfig(num_samples=4, seed=3, **SMALL))
    b = generate(SynthConfig(num_samples=4, seed=3, **SMALL))
    c = generate(SynthConfig(num_samples=4, seed=4, **SMALL))
    assert a == b and a != c
    assert all(x.views[0].tobytes() == y.views[0].tobytes() for x, y in zip(a, b))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bad_evidence_is_spread(seed):
    cfg = SynthConfig(num_samples=1, seed=seed, **SMALL)
    s, count = generate_sample(cfg, 0, Grade.BAD)
    per_view = [components(blemish_mask(v)) for v in s.views]
    assert count >= 2
    assert min(per_view) == 0
    assert max(per_view) < count
    assert sum(per_view) == count


def test_undefined_spots_are_smaller():
    cfg = SynthConfig(num_samples=1)
    assert cfg.radius_range(Grade.UNDEFINED) == (8, 15)
    assert cfg.radius_range(Grade.BAD) == (8, 30)


def test_lower_concentration_repeats_blemish():
    cfg = SynthConfig(num_samples=1, seed=2, single_view_concentration=0.0, views_per_sample=4,
                      blemish_counts={Grade.GOOD: (0, 0), Grade.BAD: (1, 1), Grade.UNDEFINED: (1, 1)},
                      **SMALL)
    s, _ = generate_sample(cfg, 0, Grade.BAD)
    assert all(components(blemish_mask(v)) == 1 for v in s.views)


def test_apportion_largest_remainder():
    assert apportion(452, PUBLISHED_MIX) == [111, 294, 47]
    assert apportion(300, PUBLISHED_MIX) == [74, 195, 31]
    assert apportion(10, (1 / 3, 1 / 3, 1 / 3)) == [4, 3, 3]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_class_counts_follow_mix(n, seed):
    from orangegrade.synth import assign_labels
    labels = assign_labels(SynthConfig(num_samples=n, seed=seed, **SMALL))
    counts = [labels.count(g) for g in Grade]
    assert counts == apportion(n, PUBLISHED_MIX)


def test_views_valid_and_roundtrip(tmp_path):
    ds = generate(SynthConfig(num_samples=5, views_per_sample=3, seed=9, **SMALL))
    for s in ds:
        assert s.num_views == 3
        for v in s.views:
            assert v.dtype == np.uint8 and v.shape == (64, 64, 3)
    write_dataset(ds, tmp_path)
    assert load_dataset(tmp_path) == ds


@pytest.mark.parametrize("kw", [
    dict(num_samples=0), dict(num_samples=1, class_mix=(0.5, 0.5, 0.5)),
    dict(num_samples=1, single_view_concentration=1.5), dict(num_samples=1, views_per_sample=0),
    dict(num_samples=1, blemish_radius=(10, 5)),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SynthConfig(**kw)
