"""Train and export entry points.

    rfhybrid train --task demod --train train.rfds --val val.rfds --out run/
    rfhybrid export --checkpoint run/checkpoint.pt --dataset val.rfds --out preds.csv
"""

from __future__ import annotations

import argparse
import json
import sys

from .trainer import TrainPlan, default_plan, run_training


def cmd_train(args) -> int:
    if args.plan:
        with open(args.plan) as fh:
            plan = TrainPlan.from_json(json.load(fh))
    else:
        plan = default_plan(args.task, desk_scale=not args.paper_scale)
    summary = run_training(plan, args.train, args.val, args.out, seed=args.seed)
    print(f"trained {plan.task} for {plan.epochs} epochs")
    print(f"final validation metric: {summary['val_metric']:.4f}")
    print(f"checkpoint: {summary['checkpoint_path']}")
    print(f"log: {summary['log_path']}")
    return 0


def cmd_export(args) -> int:
    from .predict import export_predictions

    count = export_predictions(args.checkpoint, args.dataset, args.out)
    print(f"wrote {count} predictions to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rfhybrid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one task on RFDS datasets")
    t.add_argument("--task", choices=("amc", "regression", "symbol_count", "demod"))
    t.add_argument("--plan", help="JSON train plan (overrides --task defaults)")
    t.add_argument("--train", required=True, help="training .rfds file")
    t.add_argument("--val", required=True, help="validation .rfds file")
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--paper-scale", action="store_true")
    t.add_argument("--seed", type=int, default=0)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("export", help="write predictions for a dataset")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)

    args = parser.parse_args(argv)
    if args.command == "train" and not args.plan and not args.task:
        parser.error("train needs --task or --plan")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
