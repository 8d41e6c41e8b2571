"""Per-class, average and overall accuracy, and table-shaped reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .collage import CollageLayout
from .domain import Dataset, Grade
from .model import ModelHandle, collage_batch, forward, label_from_logits
from .train import prepare_collages

COLUMNS = ("Bueno", "Malo", "Indefinido", "Avg.", "Overall")


class ZeroSupportRow(ValueError):
    def __init__(self, grade):
        self.grade = Grade(grade)
        super().__init__(f"class {self.grade} has no samples; per-class accuracy is undefined")


class EmptyClassInTestSet(ZeroSupportRow):
    pass


def mode_name(single_view: int | None) -> str:
    return "multiview" if single_view is None else f"single_view({single_view})"


def confusion_matrix(y_true, y_pred, num_classes: int = 3) -> np.ndarray:
    """counts[true][pred] as int64; accumulation order does not matter."""
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (np.asarray(y_true, dtype=np.int64), np.asarray(y_pred, dtype=np.int64)), 1)
    return counts


@dataclass(frozen=True)
class Accuracies:
    per_class: tuple
    average: float
    overall: float


def exact_accuracies(confusion) -> tuple[list[Fraction], Fraction, Fraction]:
    """Percentages as exact rationals."""
    counts = np.asarray(confusion, dtype=np.int64)
    support = counts.sum(axis=1)
    for c, s in enumerate(support):
        if s < 1:
            raise ZeroSupportRow(c)
    per_class = [Fraction(100 * int(counts[c, c]), int(support[c])) for c in range(len(support))]
    average = sum(per_class, Fraction(0)) / len(per_class)
    overall = Fraction(100 * int(np.trace(counts)), int(support.sum()))
    return per_class, average, overall


def metrics_from_confusion(confusion) -> Accuracies:
    per_class, average, overall = exact_accuracies(confusion)
    return Accuracies(tuple(float(p) for p in per_class), float(average), float(overall))


@dataclass
class MetricsReport:
    confusion: np.ndarray
    per_class: tuple
    average: float
    overall: float
    model_kind: str
    mode: str = "multiview"
    pretrained: bool = False
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_confusion(cls, confusion, model_kind, mode="multiview", pretrained=False, **extra):
        acc = metrics_from_confusion(confusion)
        return cls(np.asarray(confusion, dtype=np.int64), acc.per_class, acc.average, acc.overall,
                   str(model_kind), mode, bool(pretrained), dict(extra))

    def to_dict(self) -> dict:
        d = {
            "model": self.model_kind,
            "mode": self.mode,
            "pretrained": self.pretrained,
            "confusion": self.confusion.tolist(),
            "per_class": {g.render(): v for g, v in zip(Grade, self.per_class)},
            "average": self.average,
            "overall": self.overall,
        }
        d.update(self.extra)
        return d


def predict_labels(model: ModelHandle, test_set: Dataset, layout: CollageLayout,
                   single_view: int | None = None, batch_size: int = 16) -> np.ndarray:
    preds = []
    for start in range(0, len(test_set), batch_size):
        chunk = Dataset(test_set.samples[start:start + batch_size])
        logits = forward(model, collage_batch(model, prepare_collages(chunk, layout, single_view)))
        preds += [int(label_from_logits(row)[0]) for row in logits]
    return np.array(preds, dtype=np.int64)


def evaluate(model: ModelHandle, test_set: Dataset, layout: CollageLayout,
             single_view: int | None = None, **extra) -> MetricsReport:
    y_true = test_set.labels()
    support = np.bincount(y_true, minlength=len(Grade))
    for c, s in enumerate(support):
        if s == 0:
            raise EmptyClassInTestSet(c)
    y_pred = predict_labels(model, test_set, layout, single_view)
    return MetricsReport.from_confusion(
        confusion_matrix(y_true, y_pred), model.kind.value, mode_name(single_view),
        model.pretrained, **extra,
    )


_DISPLAY = {"resnet18": "ResNet-18", "squeezenet": "SqueezeNet"}


def format_table(reports, title: str = "") -> str:
    name_w = max([len(_DISPLAY.get(r.model_kind, r.model_kind)) for r in reports] + [10])
    lines = [title] if title else []
    lines.append(" " * name_w + "".join(f"{c:>12}" for c in COLUMNS))
    for r in reports:
        values = [*r.per_class, r.average, r.overall]
        name = _DISPLAY.get(r.model_kind, r.model_kind)
        lines.append(f"{name:<{name_w}}" + "".join(f"{v:>12.2f}" for v in values))
    return "\n".join(lines) + "\n"


def render_report(reports, json_path=None, title: str = "") -> str:
    """Text table (one row per report) and, optionally, a JSON document with
    the full confusion matrices."""
    reports = list(reports)
    text = format_table(reports, title)
    if json_path is not None:
        doc = {"columns": list(COLUMNS), "reports": [r.to_dict() for r in reports]}
        Path(json_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return text


def report_from_dict(d: dict) -> MetricsReport:
    keys = {"model", "mode", "pretrained", "confusion", "per_class", "average", "overall"}
    extra = {k: v for k, v in d.items() if k not in keys}
    return MetricsReport.from_confusion(d["confusion"], d["model"], d["mode"], d["pretrained"], **extra)
