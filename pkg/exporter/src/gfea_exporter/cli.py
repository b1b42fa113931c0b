"""CLI: gfea-export export --backbone alexnet --data <root> --out f.gfea"""

from __future__ import annotations

import argparse
import sys

from .cornell import DatasetError
from .export import BACKBONES, ExportJob, export_features


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gfea-export",
        description="Export frozen CNN backbone features to a GFEA file.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="run a feature export")
    p.add_argument("--backbone", choices=sorted(BACKBONES), required=True)
    p.add_argument("--data", required=True, help="Cornell-layout dataset root")
    p.add_argument("--out", required=True, help="output .gfea path")
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--weights", choices=["pretrained", "random"],
                   default="pretrained")
    p.add_argument("--seed", type=int, default=0,
                   help="init seed for --weights random")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(backbone=args.backbone, dataset_root=args.data,
                    output=args.out, batch_size=args.batch_size,
                    weights=args.weights, seed=args.seed)
    try:
        count = export_features(job)
    except DatasetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"exported {count} samples "
          f"(backbone {args.backbone}, dim {BACKBONES[args.backbone]['dim']}) "
          f"to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
