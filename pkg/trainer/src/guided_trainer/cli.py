"""Command line: train on a prepared corpus, infer predictions, export the
nearest-neighbor baseline."""

from __future__ import annotations

import argparse
import json
import sys

from .infer import infer, nn_baseline
from .train import TrainConfig, train


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="guided-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train on a prepared corpus")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--checkpoint", required=True)
    p_train.add_argument("--curve", default=None, help="loss-curve JSON path")
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--learning-rate", type=float, default=5e-4)
    p_train.add_argument("--batch-size", type=int, default=16)
    p_train.add_argument("--steps-per-epoch", type=int, default=12)
    p_train.add_argument("--crop", type=int, default=64)
    p_train.add_argument("--channels", type=int, default=24)
    p_train.add_argument("--scale", type=int, default=4)
    p_train.add_argument("--split-fraction", type=float, default=0.7)
    p_train.add_argument("--seed", type=int, default=0)

    p_infer = sub.add_parser("infer", help="predict one sample's HR depth")
    p_infer.add_argument("--checkpoint", required=True)
    p_infer.add_argument("--sample", required=True)
    p_infer.add_argument("--out", required=True)

    p_base = sub.add_parser(
        "baseline", help="write the nearest-neighbor upsampled prediction"
    )
    p_base.add_argument("--sample", required=True)
    p_base.add_argument("--out", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            config = TrainConfig(
                learning_rate=args.learning_rate,
                epochs=args.epochs,
                batch_size=args.batch_size,
                steps_per_epoch=args.steps_per_epoch,
                crop=args.crop,
                channels=args.channels,
                scale=args.scale,
                split_fraction=args.split_fraction,
                seed=args.seed,
            )
            summary = train(args.corpus, config, args.checkpoint, args.curve)
            print(
                json.dumps(
                    {
                        "checkpoint": args.checkpoint,
                        "initial_loss": summary["initial_loss"],
                        "final_loss": summary["final_loss"],
                        "train_samples": len(summary["train_dirs"]),
                        "test_samples": len(summary["test_dirs"]),
                    }
                )
            )
        elif args.command == "infer":
            infer(args.checkpoint, args.sample, args.out)
            print(json.dumps({"written": args.out}))
        elif args.command == "baseline":
            nn_baseline(args.sample, args.out)
            print(json.dumps({"written": args.out}))
    except Exception as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
