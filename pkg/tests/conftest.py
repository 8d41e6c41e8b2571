import numpy as np
import pytest

from orangegrade.domain import Dataset, Grade, OrangeSample
from orangegrade.synth import SynthConfig, generate

ACCEPTANCE_RESULTS = {}


def small_synth(num_samples=6, seed=0, views=3, **kw):
    """Quick-to-render synthetic set with 64 px views."""
    kw.setdefault("view_size", 64)
    kw.setdefault("blemish_radius", (3, 8))
    return generate(SynthConfig(num_samples=num_samples, views_per_sample=views, seed=seed, **kw))


def solid(color, h=10, w=10):
    v = np.empty((h, w, 3), dtype=np.uint8)
    v[:] = color
    return v


def random_dataset(rng, n, max_views=3, max_side=12):
    samples = []
    for i in range(n):
        views = [rng.integers(0, 256, size=(rng.integers(1, max_side), rng.integers(1, max_side), 3),
                              dtype=np.uint8) for _ in range(rng.integers(1, max_views + 1))]
        samples.append(OrangeSample(f"o{i:03d}", views, Grade(int(rng.integers(0, 3)))))
    return Dataset(samples)


@pytest.fixture
def tiny_dataset():
    return small_synth()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
