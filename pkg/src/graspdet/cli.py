"""Command-line entry point.

Subcommands: train, eval, augment, features, render. Exit codes: 0 ok,
1 usage error, 2 data error, 3 numeric failure. A config file of flat
``key = value`` lines can back any train/eval flag; explicit flags win
over the file, the file wins over defaults.
"""

from __future__ import annotations

import argparse
import os
import sys

import cv2
import numpy as np

from . import dataset as ds
from . import features as feat
from . import pipeline as pl
from .augment import AugmentSpec, expand
from .errors import (
    DimMismatch,
    GraspdetError,
    NonFiniteLoss,
)
from .geometry import GraspRect, rect_to_corners
from .preprocess import NormTargetVec, compose_input, denormalize_target
from .regressor import forward, load_checkpoint, save_checkpoint

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

GT_COLOR = (0, 200, 0)       # BGR green, ground truth
PRED_COLOR = (0, 0, 230)     # BGR red, prediction


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path) as f:
        for i, ln in enumerate(f, 1):
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise ValueError(f"{path}:{i}: expected 'key = value'")
            k, v = ln.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


TRAIN_DEFAULTS = {
    "batch_size": 128, "batches_per_epoch": 100, "epochs": 25,
    "split_ratio": 0.9, "val_batch_size": 10, "val_batches": 100,
    "seed": 0, "feature_dim": 1024, "lr": 1e-3, "dropout_p": 0.5,
    "families": "product",
}


def _layer_config(args, keys) -> dict:
    """flags > config file > defaults."""
    merged = dict(TRAIN_DEFAULTS)
    if getattr(args, "config", None):
        file_vals = _read_config_file(args.config)
        for k, v in file_vals.items():
            if k not in merged:
                raise ValueError(f"unknown config key {k!r}")
            merged[k] = type(merged[k])(v)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            merged[k] = v
    return merged


def _add_train_flags(p):
    p.add_argument("--data", help="Cornell-layout dataset root")
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="use a synthetic source with N samples instead of --data")
    p.add_argument("--extractor", choices=["toy", "features-file"],
                   default="toy")
    p.add_argument("--features", help="GFEA feature file (features-file extractor)")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--batches-per-epoch", type=int, dest="batches_per_epoch")
    p.add_argument("--val-batch-size", type=int, dest="val_batch_size")
    p.add_argument("--val-batches", type=int, dest="val_batches")
    p.add_argument("--split-ratio", type=float, dest="split_ratio")
    p.add_argument("--feature-dim", type=int, dest="feature_dim")
    p.add_argument("--lr", type=float)
    p.add_argument("--dropout-p", type=float, dest="dropout_p")
    p.add_argument("--families", choices=["product", "separate"])


def _make_source(args, cfg):
    if args.synthetic:
        return pl.SyntheticSource(n_samples=args.synthetic,
                                  feature_dim=cfg["feature_dim"],
                                  seed=cfg["seed"])
    if not args.data:
        raise UsageError("--data is required unless --synthetic is given")
    feature_file = None
    if args.extractor == "features-file":
        if not args.features:
            raise UsageError("--features is required with --extractor features-file")
        feature_file = feat.load_features(args.features)
    return pl.CornellSource(args.data, extractor=args.extractor,
                            feature_file=feature_file,
                            families=cfg["families"],
                            feature_dim=cfg["feature_dim"])


class UsageError(Exception):
    pass


def _config_for(cfg, seed=None):
    return pl.TrainConfig(
        batch_size=cfg["batch_size"],
        batches_per_epoch=cfg["batches_per_epoch"],
        epochs=cfg["epochs"],
        split_ratio=cfg["split_ratio"],
        val_batch_size=cfg["val_batch_size"],
        val_batches=cfg["val_batches"],
        seed=cfg["seed"] if seed is None else seed,
        families=cfg["families"],
        extractor="toy",
        feature_dim=cfg["feature_dim"],
        lr=cfg["lr"],
        dropout_p=cfg["dropout_p"],
    )


def cmd_train(args) -> int:
    cfg = _layer_config(args, TRAIN_DEFAULTS.keys())
    source = _make_source(args, cfg)
    config = _config_for(cfg)
    os.makedirs(args.out, exist_ok=True)
    report, head, state = pl.train(config, source)
    save_checkpoint(os.path.join(args.out, "checkpoint.bin"), head, state)
    with open(os.path.join(args.out, "report.json"), "w") as f:
        f.write(report.to_json())
    with open(os.path.join(args.out, "loss.csv"), "w") as f:
        f.write(pl.loss_csv(report))
    print(f"final train loss {report.train_loss[-1]:.6f}  "
          f"accuracy {report.accuracy:.4f}")
    print(f"outputs written to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _layer_config(args, TRAIN_DEFAULTS.keys())
    source = _make_source(args, cfg)

    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",")]
        if args.runs and args.runs != len(seeds):
            raise UsageError("--runs disagrees with the number of --seeds")
        reports = []
        for seed in seeds:
            report, _, _ = pl.train(_config_for(cfg, seed=seed), source)
            reports.append(report)
            print(f"seed {seed}: accuracy {report.accuracy:.4f}")
        print(pl.report_table(reports))
        return EXIT_OK

    if not args.checkpoint:
        raise UsageError("--checkpoint is required unless --seeds is given")
    head, _ = load_checkpoint(args.checkpoint)
    if head.in_dim != source.feature_dim:
        print(f"error: checkpoint dim {head.in_dim} != "
              f"feature dim {source.feature_dim}", file=sys.stderr)
        return EXIT_DATA
    accuracy, verdicts = pl.evaluate(head, source)
    print(f"accuracy {accuracy:.4f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "verdicts.csv")
        with open(path, "w") as f:
            f.write("id,success,best_truth,best_jaccard,x,y,theta,w,h\n")
            for v in verdicts:
                x, y, th, w, h = v.pred
                f.write(f"{v.id},{int(v.success)},{v.best_truth},"
                        f"{v.best_jaccard:.6f},{x:.3f},{y:.3f},{th:.6f},"
                        f"{w:.3f},{h:.3f}\n")
        print(f"verdicts written to {path}")
    return EXIT_OK


def _draw_rect(img, rect: GraspRect, color, thickness=2):
    c = [(int(round(x)), int(round(y))) for x, y in rect_to_corners(rect).corners]
    for i in range(4):
        cv2.line(img, c[i], c[(i + 1) % 4], color, thickness)


def cmd_augment(args) -> int:
    if not args.preview:
        raise UsageError("augment currently only supports --preview")
    source_ids = ds.scan_dataset(args.data)
    sid = args.id or source_ids[0]
    if sid not in source_ids:
        print(f"error: unknown sample id {sid}", file=sys.stderr)
        return EXIT_DATA
    sample = ds.load_sample(args.data, sid)
    inp, tf = compose_input(sample)
    labels = [tf.map_rect(r) for r in sample.pos_rects]
    os.makedirs(args.out, exist_ok=True)
    spec = AugmentSpec()
    n = 0
    for i, (aug_inp, aug_label) in enumerate(
            expand([(inp, labels[0])], spec, families=args.families)):
        img = ((aug_inp.tensor + 1.0) * 127.5).clip(0, 255).astype(np.uint8)
        img = cv2.cvtColor(img, cv2.COLOR_RGB2BGR)
        _draw_rect(img, aug_label, GT_COLOR)
        cv2.imwrite(os.path.join(args.out, f"{sid}_aug{i:02d}.png"), img)
        n += 1
    print(f"wrote {n} preview images to {args.out}")
    return EXIT_OK


def cmd_features(args) -> int:
    if args.action != "validate":
        raise UsageError(f"unknown features action {args.action!r}")
    ff = feat.load_features(args.path)
    print(f"backbone {ff.backbone_name}")
    print(f"dim {ff.dim}")
    print(f"count {ff.count}")
    print(f"checksum {feat.checksum(args.path)}")
    return EXIT_OK


def cmd_render(args) -> int:
    source_ids = ds.scan_dataset(args.data)
    if args.id not in source_ids:
        print(f"error: unknown sample id {args.id}", file=sys.stderr)
        return EXIT_DATA
    sample = ds.load_sample(args.data, args.id)
    inp, tf = compose_input(sample)
    truths = [tf.map_rect(r) for r in sample.pos_rects]

    img = ((inp.tensor + 1.0) * 127.5).clip(0, 255).astype(np.uint8)
    img = cv2.cvtColor(img, cv2.COLOR_RGB2BGR)
    for t in truths:
        _draw_rect(img, t, GT_COLOR, 1)

    suffix = ""
    if args.checkpoint:
        head, _ = load_checkpoint(args.checkpoint)
        f = feat.toy_extract(inp, dim=head.in_dim).values
        out, _ = forward(head, f)
        pred = denormalize_target(NormTargetVec.from_array(out[0]))
        _draw_rect(img, pred, PRED_COLOR, 2)
        from .geometry import is_success
        ok, _ = is_success(pred, truths)
        suffix = "_ok" if ok else "_fail"

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.id}{suffix}.png")
    cv2.imwrite(path, img)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graspdet",
        description="Grasp-rectangle detection: training, evaluation, and "
                    "inspection tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the dense regression head")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint or seed sweep")
    _add_train_flags(p)
    p.add_argument("--checkpoint")
    p.add_argument("--runs", type=int)
    p.add_argument("--seeds", help="comma-separated seed list for a sweep")
    p.add_argument("--out", help="directory for the per-sample verdict CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("augment", help="write augmentation preview images")
    p.add_argument("--preview", action="store_true")
    p.add_argument("--data", required=True)
    p.add_argument("--id", help="sample id (default: first admitted)")
    p.add_argument("--families", choices=["product", "separate"],
                   default="product")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("features", help="feature-file tools")
    p.add_argument("action", choices=["validate"])
    p.add_argument("path")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("render", help="write an annotated sample image")
    p.add_argument("--data", required=True)
    p.add_argument("--id", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage problems; remap to the documented code
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError,) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteLoss as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except DimMismatch as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (GraspdetError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
