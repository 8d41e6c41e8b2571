"""Command-line entry point: ``orangegrade {synth,split,train,eval,experiment}``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .collage import CollageLayout
from .domain import COLLAGE_HEIGHT, COLLAGE_WIDTH
from .evaluation import evaluate, mode_name, render_report
from .ingest import (
    load_dataset,
    load_split_manifest,
    manifest_rows,
    write_dataset,
    write_manifest,
)
from .model import ArchitectureKind, build_model, load_model
from .split import SplitSpec, stratified_split
from .synth import SynthConfig, generate
from .train import TrainConfig, train

log = logging.getLogger("orangegrade")

WEIGHTS_DIR_ENV = "ORANGEGRADE_WEIGHTS_DIR"
PLAN_SCHEMA_VERSION = 1
META_NAME = "model.json"


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return n


def _layout_from_args(args) -> CollageLayout:
    return CollageLayout(
        rows=args.rows, tile_size=args.tile_size, final_width=args.width,
        final_height=args.height, pad_to_final=args.pad_to_final,
    )


def _view_index(args):
    return args.view_index if args.mode == "single-view" else None


def _load(args):
    if getattr(args, "manifest", None):
        return load_split_manifest(args.dataset, args.manifest)
    return load_dataset(args.dataset)


def cmd_synth(args) -> None:
    cfg = SynthConfig(
        num_samples=args.samples, views_per_sample=args.views, view_size=args.view_size,
        single_view_concentration=args.concentration, seed=args.seed,
    )
    write_dataset(generate(cfg), args.out)
    print(f"wrote {args.samples} samples to {args.out}")


def cmd_split(args) -> None:
    result = stratified_split(load_dataset(args.dataset), SplitSpec(args.train_fraction, args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest_rows(result.train), out / "train.csv")
    write_manifest(manifest_rows(result.test), out / "test.csv")
    print(f"train={len(result.train)} test={len(result.test)} -> {out}")


def _default_weights(kind: str):
    d = os.environ.get(WEIGHTS_DIR_ENV)
    if d and (Path(d) / f"{kind}.weights").is_file():
        return Path(d) / f"{kind}.weights"
    return None


def cmd_train(args) -> None:
    layout = _layout_from_args(args)
    weights = args.pretrained_weights
    model = build_model(
        args.model, pretrained=weights is not None, weights_path=weights, seed=args.seed,
        input_size=(layout.final_height, layout.final_width),
    )
    config = TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, learning_rate=args.lr, seed=args.seed,
        single_view=_view_index(args), class_weighting=args.class_weighting,
        checkpoint_dir=str(Path(args.out) / "checkpoints") if args.checkpoints else None,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model, record = train(model, _load(args), layout, config)
    model.save(out / "model.weights")
    (out / "train.log").write_text("\n".join(record.log_lines()) + "\n")
    meta = {"model": model.kind.value, "pretrained": model.pretrained,
            "layout": asdict(layout), "train": asdict(config)}
    (out / META_NAME).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(record.log_lines()[-1])


def cmd_eval(args) -> None:
    meta_path = Path(args.weights).with_name(META_NAME)
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    layout = _layout_from_args(args)
    model = load_model(args.weights, pretrained=meta.get("pretrained", False),
                       input_size=(layout.final_height, layout.final_width))
    report = evaluate(model, _load(args), layout, _view_index(args), seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    text = render_report([report], out / "report.json")
    (out / "report.txt").write_text(text)
    print(text, end="")


# experiment grid


@dataclass
class ExperimentPlan:
    dataset_root: str
    output_dir: str
    models: list = field(default_factory=lambda: ["resnet18", "squeezenet"])
    modes: list = field(default_factory=lambda: ["multiview", "single_view"])
    view_index: int = 0
    pretrained: list = field(default_factory=lambda: [False])
    weights: dict = field(default_factory=dict)
    split: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    layout: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.models or not self.modes or not self.pretrained:
            raise ValueError("plan needs at least one model, one mode and one pretrained setting")
        for m in self.models:
            ArchitectureKind(m)
        for m in self.modes:
            if m not in ("multiview", "single_view"):
                raise ValueError(f"unknown mode {m!r}")


def read_plan(path) -> ExperimentPlan:
    """Parse a JSON plan document.

    ``schema_version`` must be 1. ``dataset`` and ``output_dir`` are required;
    relative paths are resolved against the plan file's directory.
    """
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("schema_version") != PLAN_SCHEMA_VERSION:
        raise ValueError(f"unsupported plan schema_version {doc.get('schema_version')!r}")
    base = path.parent

    def resolve(p):
        return str(p if Path(p).is_absolute() else base / p)

    known = {"schema_version", "dataset", "output_dir", "models", "modes", "view_index",
             "pretrained", "weights", "split", "train", "layout"}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown plan keys: {sorted(unknown)}")
    kw = {k: doc[k] for k in known - {"schema_version", "dataset", "output_dir"} if k in doc}
    kw["weights"] = {k: resolve(v) for k, v in kw.get("weights", {}).items()}
    return ExperimentPlan(dataset_root=resolve(doc["dataset"]),
                          output_dir=resolve(doc["output_dir"]), **kw)


def _cell_name(model, view_index, pretrained):
    mode = "multiview" if view_index is None else f"single{view_index}"
    return f"{model}_{mode}_{'pretrained' if pretrained else 'scratch'}"


def run_experiment(plan: ExperimentPlan) -> dict:
    """Run the {models x modes x pretrained} grid; returns the run summary."""
    out = Path(plan.output_dir)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    layout = CollageLayout(**plan.layout)
    split_spec = SplitSpec(**plan.split)
    train_kw = dict(plan.train)
    seed = train_kw.get("seed", 0)
    split = stratified_split(load_dataset(plan.dataset_root), split_spec)
    write_manifest(manifest_rows(split.train), out / "train.csv")
    write_manifest(manifest_rows(split.test), out / "test.csv")

    summary = {"completed": [], "skipped": [], "failed": None, "tables": []}
    for pretrained in plan.pretrained:
        for mode in plan.modes:
            view_index = plan.view_index if mode == "single_view" else None
            rows = []
            for kind in plan.models:
                name = _cell_name(kind, view_index, pretrained)
                weights = plan.weights.get(kind) or _default_weights(kind)
                if pretrained and weights is None:
                    log.warning("skipping %s: no pretrained weight archive configured", name)
                    summary["skipped"].append(name)
                    continue
                try:
                    model = build_model(kind, pretrained=pretrained,
                                        weights_path=weights if pretrained else None, seed=seed,
                                        input_size=(layout.final_height, layout.final_width))
                    model, record = train(model, split.train, layout,
                                          TrainConfig(single_view=view_index, **train_kw))
                    report = evaluate(model, split.test, layout, view_index, seed=seed,
                                      config={"split": asdict(split_spec), "train": train_kw,
                                              "layout": asdict(layout)})
                except Exception as e:
                    summary["failed"] = {"cell": name, "error": f"{type(e).__name__}: {e}"}
                    _write_summary(out, summary)
                    raise
                render_report([report], out / "reports" / f"{name}.json")
                (out / "reports" / f"{name}.log").write_text("\n".join(record.log_lines()) + "\n")
                summary["completed"].append(name)
                rows.append(report)
            if rows:
                label = f"{mode_name(view_index)}_{'pretrained' if pretrained else 'scratch'}"
                title = (f"{'Multiview' if view_index is None else 'Single view'} classification "
                         f"scores (%), {'pretrained' if pretrained else 'scratch-trained'} models")
                text = render_report(rows, out / "tables" / f"{label}.json", title=title)
                (out / "tables" / f"{label}.txt").write_text(text)
                summary["tables"].append(label)
                print(text)
    _write_summary(out, summary)
    return summary


def _write_summary(out: Path, summary: dict) -> None:
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def cmd_experiment(args) -> None:
    run_experiment(read_plan(args.plan))


# argument parsing


def _add_layout(p):
    g = p.add_argument_group("collage layout")
    g.add_argument("--rows", type=_positive, default=1)
    g.add_argument("--tile-size", type=_positive, default=300)
    g.add_argument("--width", type=_positive, default=COLLAGE_WIDTH)
    g.add_argument("--height", type=_positive, default=COLLAGE_HEIGHT)
    g.add_argument("--pad-to-final", action="store_true")


def _add_mode(p):
    p.add_argument("--mode", choices=("multiview", "single-view"), default="multiview")
    p.add_argument("--view-index", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orangegrade", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic multi-view dataset")
    p.add_argument("--samples", type=_positive, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--views", type=_positive, default=8)
    p.add_argument("--view-size", type=_positive, default=300)
    p.add_argument("--concentration", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("split", help="stratified train/test manifests")
    p.add_argument("--dataset", required=True)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest", help="split manifest (default: the dataset's own manifest)")
    p.add_argument("--model", choices=[k.value for k in ArchitectureKind], default="resnet18")
    p.add_argument("--pretrained-weights",
                   default=None, help="backbone weight archive; omit to train from scratch")
    p.add_argument("--epochs", type=_positive, default=30)
    p.add_argument("--batch-size", type=_positive, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-weighting", action="store_true")
    p.add_argument("--checkpoints", action="store_true", help="save epoch_N.weights every epoch")
    p.add_argument("--out", required=True)
    _add_mode(p)
    _add_layout(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained classifier")
    p.add_argument("--dataset", required=True)
    p.add_argument("--manifest")
    p.add_argument("--weights", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_mode(p)
    _add_layout(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="run a full experiment grid from a JSON plan")
    p.add_argument("plan")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except Exception as e:
        # plain ValueError comes from config invariants, i.e. bad flag values or plan contents
        if type(e) is ValueError:
            print(f"orangegrade: error: {e}", file=sys.stderr)
            return 2
        print(f"orangegrade: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
