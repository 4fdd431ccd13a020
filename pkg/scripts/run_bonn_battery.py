#!/usr/bin/env python3
"""Full 16-case benchmark battery against a real Bonn-layout dataset.

Expects the five-set corpus (A..E or Z/O/N/F/S directories of 100 records
each) under --data-root or $PYRSEIZ_DATA. With 10 folds and default epochs
this is a long run; start with --cases A-E to spot-check a single problem.
"""

import argparse
import os
import sys
import time
from pathlib import Path

from pyrseiz import (
    TrainingConfig,
    emit_battery,
    emit_battery_comparison,
    load_bonn_root,
    model_config,
    run_battery,
    get_scheme,
)
from pyrseiz.evaluation import BATTERY_CASES


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-root", default=os.environ.get("PYRSEIZ_DATA"))
    parser.add_argument("--model", default="M5")
    parser.add_argument("--scheme", type=int, default=1, choices=(1, 2))
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=20)
    parser.add_argument("--batch", type=int, default=32)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--cases", nargs="*", default=list(BATTERY_CASES))
    parser.add_argument("--out", default="runs/bonn")
    return parser.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    if not args.data_root:
        print("error: no dataset root; pass --data-root or set PYRSEIZ_DATA", file=sys.stderr)
        return 1
    records = load_bonn_root(args.data_root)
    scheme = get_scheme(args.scheme)
    template = model_config(args.model, 2)
    training = TrainingConfig(
        learning_rate=args.lr, batch_size=args.batch, epochs=args.epochs, seed=args.seed
    )

    start = time.perf_counter()
    battery = run_battery(
        records, scheme, template, training,
        k=args.folds, cases=args.cases, jobs=args.jobs, model_name=args.model,
    )
    elapsed = time.perf_counter() - start

    print(f"{'case':<10} {'acc':>8} {'acc_v':>8} {'reference':>10}")
    for row in battery.rows:
        reference = "-" if row.reference_acc_v is None else f"{row.reference_acc_v:.2f}"
        print(f"{row.case:<10} {100 * row.mean_acc:8.2f} {100 * row.mean_acc_v:8.2f} {reference:>10}")
    mean_acc_v = sum(r.mean_acc_v for r in battery.rows) / len(battery.rows)
    print(f"battery mean acc_v: {100 * mean_acc_v:.2f}%  ({elapsed / 60:.1f} min)")

    out = Path(args.out)
    stem = f"battery_scheme{scheme.id}_{args.model}_seed{args.seed}"
    emit_battery(battery, out / f"{stem}.json", fmt="json")
    emit_battery(battery, out / f"{stem}.csv", fmt="csv")
    comparison = emit_battery_comparison(battery, out / f"{stem}_comparison.csv")
    print(f"reports under {comparison.parent}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
