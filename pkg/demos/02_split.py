"""
A stratified 70/30 split
========================

Class totals 111/294/47 (good/bad/undefined) split into 78/206/33 and
33/88/14. Only the labels matter, so the views are tiny solid squares.
"""
import numpy as np

from orangegrade.domain import Dataset, Grade, OrangeSample, class_counts
from orangegrade.split import SplitSpec, stratified_split, train_count

view = np.full((4, 4, 3), 128, dtype=np.uint8)
labels = [Grade.GOOD] * 111 + [Grade.BAD] * 294 + [Grade.UNDEFINED] * 47
ds = Dataset([OrangeSample(f"o{i:03d}", [view], g) for i, g in enumerate(labels)])

r = stratified_split(ds, SplitSpec(train_fraction=0.7, seed=42))
print("train", dict((g.render(), n) for g, n in class_counts(r.train).items()))
print("test ", dict((g.render(), n) for g, n in class_counts(r.test).items()))

# round half up, per class
print([train_count(0.7, n) for n in (111, 294, 47)])

# same seed, same split
again = stratified_split(ds, SplitSpec(0.7, 42))
print("reproducible:", again.train.ids == r.train.ids)
