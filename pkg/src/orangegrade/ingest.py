"""Reading and writing datasets in the on-disk layout.

Layout::

    root/manifest.csv          header "sample_id,label,num_views"
    root/<sample_id>/view_00.png
    root/<sample_id>/view_01.png
    ...

Views are 8-bit RGB PNGs. Manifest order is dataset order.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .domain import Dataset, OrangeSample, UnknownLabel, parse_grade

MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = "sample_id,label,num_views"
MAX_VIEWS = 100

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")


class IngestError(Exception):
    pass


class MissingFile(IngestError, FileNotFoundError):
    pass


class MalformedHeader(IngestError):
    pass


class MalformedRow(IngestError):
    def __init__(self, line_no, reason):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}")


class DuplicateSampleId(IngestError):
    def __init__(self, sample_id):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id {sample_id!r}")


class MissingViewFile(IngestError):
    def __init__(self, sample_id, index):
        self.sample_id = sample_id
        self.index = index
        super().__init__(f"sample {sample_id!r}: missing {view_filename(index)}")


class DecodeError(IngestError):
    def __init__(self, path, reason=""):
        self.path = Path(path)
        super().__init__(f"cannot decode {path}: {reason}")


class IoError(IngestError, OSError):
    def __init__(self, path, reason=""):
        self.path = Path(path)
        super().__init__(f"cannot write {path}: {reason}")


@dataclass(frozen=True)
class ManifestRow:
    sample_id: str
    label_text: str
    view_count: int


def view_filename(index: int) -> str:
    return f"view_{index:02d}.png"


def read_manifest(path) -> list[ManifestRow]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    with open(path, encoding="utf-8", newline="") as f:
        lines = f.read().splitlines()
    if not lines or lines[0].strip() != MANIFEST_HEADER:
        raise MalformedHeader(
            f"{path}: expected header {MANIFEST_HEADER!r}, got {lines[0] if lines else ''!r}"
        )

    rows = []
    seen = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 3:
            raise MalformedRow(line_no, f"expected 3 fields, got {len(fields)}")
        sample_id, label_text, num_views = (x.strip() for x in fields)
        if not _ID_RE.match(sample_id):
            raise MalformedRow(line_no, f"invalid sample id {sample_id!r}")
        try:
            count = int(num_views)
        except ValueError:
            raise MalformedRow(line_no, f"num_views {num_views!r} is not an integer") from None
        if not 1 <= count <= MAX_VIEWS:
            raise MalformedRow(line_no, f"num_views must be in 1..{MAX_VIEWS}, got {count}")
        if sample_id in seen:
            raise DuplicateSampleId(sample_id)
        seen.add(sample_id)
        rows.append(ManifestRow(sample_id, label_text, count))
    return rows


def write_manifest(rows, path) -> None:
    path = Path(path)
    lines = [MANIFEST_HEADER]
    lines += [f"{r.sample_id},{r.label_text},{r.view_count}" for r in rows]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(path, str(e)) from e


def manifest_rows(dataset: Dataset) -> list[ManifestRow]:
    return [ManifestRow(s.id, s.label.render(), s.num_views) for s in dataset]


def read_view(path) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode != "RGB":
                # alpha, palette and grayscale inputs are refused rather than converted
                raise DecodeError(path, f"expected 8-bit RGB, got mode {im.mode}")
            return np.asarray(im, dtype=np.uint8)
    except DecodeError:
        raise
    except FileNotFoundError:
        raise
    except Exception as e:
        raise DecodeError(path, str(e)) from e


def write_view(pixels: np.ndarray, path) -> None:
    path = Path(path)
    try:
        Image.fromarray(np.ascontiguousarray(pixels)).save(path, format="PNG")
    except OSError as e:
        raise IoError(path, str(e)) from e


def _load_sample(root: Path, row: ManifestRow) -> OrangeSample:
    try:
        label = parse_grade(row.label_text)
    except UnknownLabel:
        raise UnknownLabel(row.label_text, sample_id=row.sample_id) from None
    views = []
    for i in range(row.view_count):
        p = root / row.sample_id / view_filename(i)
        if not p.is_file():
            raise MissingViewFile(row.sample_id, i)
        views.append(read_view(p))
    return OrangeSample(row.sample_id, views, label)


def load_dataset(root, workers: int = 1) -> Dataset:
    """Load ``root/manifest.csv`` and every listed view.

    With ``workers > 1`` samples are decoded in a thread pool; the result is
    still in manifest order.
    """
    root = Path(root)
    rows = read_manifest(root / MANIFEST_NAME)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            samples = list(pool.map(lambda r: _load_sample(root, r), rows))
    else:
        samples = [_load_sample(root, r) for r in rows]
    return Dataset(samples)


def write_dataset(dataset: Dataset, root) -> None:
    root = Path(root)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(root, str(e)) from e
    for s in dataset:
        if not _ID_RE.match(s.id):
            raise IoError(root / s.id, "sample id must match [A-Za-z0-9_-]+")
        if s.num_views > MAX_VIEWS:
            raise IoError(root / s.id, f"more than {MAX_VIEWS} views")
        d = root / s.id
        try:
            d.mkdir(exist_ok=True)
        except OSError as e:
            raise IoError(d, str(e)) from e
        for i, v in enumerate(s.views):
            write_view(v, d / view_filename(i))
    write_manifest(manifest_rows(dataset), root / MANIFEST_NAME)


def subset(dataset: Dataset, ids) -> Dataset:
    """Samples of ``dataset`` with the given ids, in the order of ``ids``."""
    by_id = {s.id: s for s in dataset}
    return Dataset([by_id[i] for i in ids])


def load_split_manifest(dataset_root, manifest_path) -> Dataset:
    """Load the samples listed in a split manifest from a dataset tree."""
    root = Path(dataset_root)
    rows = read_manifest(manifest_path)
    return Dataset([_load_sample(root, r) for r in rows])
