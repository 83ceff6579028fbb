"""Command line: extract --model NAME --data DIR --out DIR --batch-size N."""

from __future__ import annotations

import argparse
import sys

from .extract import extract
from .jobs import ExtractError, ExtractJob
from .models import SUPPORTED_MODELS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Export pooled penultimate features, labels and the "
                    "classifier head of a pretrained model into a tsre bundle")
    parser.add_argument("--model", required=True, choices=SUPPORTED_MODELS)
    parser.add_argument("--data", required=True,
                        help="image folder with one subdirectory per class")
    parser.add_argument("--out", required=True, help="output bundle directory")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--split", default=None,
                        help="optional split subdirectory under --data (e.g. val)")
    parser.add_argument("--weights", default="DEFAULT",
                        help="torchvision weight enum name, or 'none' for "
                             "seeded random initialization (default: DEFAULT)")
    parser.add_argument("--seed", type=int, default=0,
                        help="initialization seed used with --weights none")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExtractJob(model=args.model, data_dir=args.data, out_dir=args.out,
                     batch_size=args.batch_size, split=args.split,
                     weights=args.weights, seed=args.seed)
    try:
        report = extract(job)
    except ExtractError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    for key in ("out_dir", "n_samples", "n_channels", "n_classes",
                "hook_point", "max_logit_deviation"):
        print(f"{key} = {report[key]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
