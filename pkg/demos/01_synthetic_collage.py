"""
Synthetic oranges and their collages
====================================

Render a few multi-view oranges, then glue each one's views into the wide
image the classifier sees. Files land in ./demo_out/collages.
"""
from pathlib import Path

import numpy as np

from orangegrade.collage import CollageLayout, compose_collage, save_collage, select_single_view
from orangegrade.synth import SynthConfig, blemish_mask, generate

out = Path("demo_out/collages")
out.mkdir(parents=True, exist_ok=True)

# 6 oranges, 8 views each, default (imbalanced) class mix
ds = generate(SynthConfig(num_samples=6, view_size=128, seed=1))
for s in ds:
    spots = [int(blemish_mask(v).sum()) for v in s.views]
    print(s.id, s.label.render(), "blemish pixels per view:", spots)

# default layout: one row of tiles stretched to 2500x300
layout = CollageLayout()
c = compose_collage(ds.samples[0], layout)
print("collage", c.pixels.shape, "from", c.view_count, "views")
save_collage(c, out / f"{c.source_id}.png")

# reduced layout for CPU work: 768x96
small = CollageLayout.reduced(96)
for s in ds:
    save_collage(compose_collage(s, small), out / f"{s.id}_small.png")

# single-view ablation: same pipeline, one tile
one = compose_collage(select_single_view(ds.samples[0], 0), small)
print("single view collage", one.pixels.shape, "mean", np.round(one.pixels.mean(axis=(0, 1)), 1))
