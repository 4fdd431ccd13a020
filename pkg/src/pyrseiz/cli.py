"""Command line for the full pipeline: params, synth, train, cv, battery, predict."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import (
    BONN_RECORD_LENGTH,
    BandSpec,
    define_case,
    ids_by_set,
    load_bonn_root,
    plan_folds,
    synthesize_dataset,
    write_bonn_dataset,
)
from .ensemble import VoteRecord, majority_vote, write_vote_log
from .evaluation import (
    BATTERY_CASES,
    emit_battery,
    emit_battery_comparison,
    emit_report,
    run_battery,
    run_cv,
)
from .network import MODEL_GRID, MODEL_NAMES, count_parameters, forward, model_config
from .training import TrainingConfig, train, write_history_csv
from .windowing import augment_training, get_scheme, segment_signal

DATA_ENV_VAR = "PYRSEIZ_DATA"

# Well-separated default bands (Hz) for synthetic classes, low to high.
SYNTH_BANDS = (
    (2.0, 4.0),
    (8.0, 12.0),
    (20.0, 30.0),
    (35.0, 45.0),
    (55.0, 65.0),
)


def _data_root(args: argparse.Namespace) -> Path:
    root = args.data_root or os.environ.get(DATA_ENV_VAR)
    if not root:
        raise ValueError(
            f"no dataset root: pass --data-root or set {DATA_ENV_VAR}"
        )
    return Path(root)


def _training_config(args: argparse.Namespace) -> TrainingConfig:
    return TrainingConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
    )


def _model_config(args: argparse.Namespace, num_classes: int):
    return model_config(
        args.model, num_classes, fc1_width=args.fc1, dropout_rate=args.dropout
    )


def cmd_params(args: argparse.Namespace) -> int:
    names = list(args.models)
    if args.all or not names:
        names = list(MODEL_NAMES)
    unknown = [n for n in names if n.upper() not in MODEL_GRID]
    if unknown:
        raise ValueError(
            f"unknown model name(s) {unknown}; valid names: {', '.join(MODEL_NAMES)}"
        )
    print(f"{'model':<6}{'family':<13}{'fc1':>4}{'dropout':>9}{'params(2)':>11}{'params(3)':>11}")
    for name in names:
        variant = MODEL_GRID[name.upper()]
        two = count_parameters(model_config(name, 2))
        three = count_parameters(model_config(name, 3))
        family = "pyramid" if variant.kernel_counts[0] > variant.kernel_counts[2] else "traditional"
        print(
            f"{variant.name:<6}{family:<13}{variant.fc1_width:>4}"
            f"{variant.dropout_rate:>9}{two:>11}{three:>11}"
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if not 2 <= args.classes <= len(SYNTH_BANDS):
        raise ValueError(f"--classes must be in [2, {len(SYNTH_BANDS)}]")
    profiles = [BandSpec(low, high) for low, high in SYNTH_BANDS[: args.classes]]
    records = synthesize_dataset(
        num_records_per_class=args.records,
        class_profiles=profiles,
        length=args.length,
        noise_level=args.noise,
        seed=args.seed,
    )
    out = Path(args.out)
    paths = write_bonn_dataset(records, out)
    print(f"wrote {len(paths)} records ({args.classes} classes) under {out}")
    return 0


def _artifact_stem(kind: str, args: argparse.Namespace, case_name: str) -> str:
    return f"{kind}_{case_name}_scheme{args.scheme}_{args.model}_seed{args.seed}"


def cmd_train(args: argparse.Namespace) -> int:
    case = define_case(args.case)
    scheme = get_scheme(args.scheme)
    records = load_bonn_root(
        _data_root(args), letters=case.sets, expected_length=args.record_length
    )
    config = _model_config(args, case.num_classes)
    training = _training_config(args)
    windows = augment_training(records, case, scheme)
    params, history = train(config, windows, training)
    out = Path(args.out)
    stem = _artifact_stem("train", args, case.name)
    ckpt = out / f"{stem}.ckpt"
    hist = out / f"{stem}_history.csv"
    save_checkpoint(params, config, ckpt)
    write_history_csv(history, hist)
    print(f"trained on {len(windows)} windows; checkpoint {ckpt}, history {hist}")
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    case = define_case(args.case)
    scheme = get_scheme(args.scheme)
    records = load_bonn_root(
        _data_root(args), letters=case.sets, expected_length=args.record_length
    )
    config = _model_config(args, case.num_classes)
    training = _training_config(args)
    plan = plan_folds(ids_by_set(records), k=args.folds, seed=args.seed)
    report = run_cv(
        records,
        case,
        scheme,
        config,
        training,
        plan,
        jobs=args.jobs,
        keep_params=True,
        model_name=args.model,
    )
    out = Path(args.out)
    stem = _artifact_stem("cv", args, case.name)
    report_path = emit_report(report, out / f"{stem}.{args.format}", fmt=args.format)
    for fold in report.folds:
        save_checkpoint(fold.params, config, out / f"{stem}_fold{fold.fold}.ckpt")
    mean_acc = report.mean["acc"]
    mean_acc_v = report.mean["acc_v"]
    print(
        f"{case.name} scheme {scheme.id} {args.model}: "
        f"mean acc {mean_acc:.4f}, mean acc_v {mean_acc_v:.4f} "
        f"over {plan.k} folds; report {report_path}"
    )
    return 0


def cmd_battery(args: argparse.Namespace) -> int:
    scheme = get_scheme(args.scheme)
    records = load_bonn_root(_data_root(args), expected_length=args.record_length)
    template = _model_config(args, 2)
    training = _training_config(args)
    battery = run_battery(
        records,
        scheme,
        template,
        training,
        k=args.folds,
        cases=BATTERY_CASES,
        jobs=args.jobs,
        model_name=args.model,
    )
    out = Path(args.out)
    stem = f"battery_scheme{args.scheme}_{args.model}_seed{args.seed}"
    summary = emit_battery(battery, out / f"{stem}.{args.format}", fmt=args.format)
    comparison = emit_battery_comparison(battery, out / f"{stem}_comparison.csv")
    for row in battery.rows:
        print(f"{row.case:<10} acc_v {100 * row.mean_acc_v:7.3f}%")
    print(f"summary {summary}; comparison {comparison}")
    return 0


def _read_signal(path: Path) -> np.ndarray:
    if not path.is_file():
        raise FileNotFoundError(f"input signal not found: {path}")
    values = []
    with path.open("r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric sample {text!r}") from None
    return np.array(values, dtype=np.float64)


def cmd_predict(args: argparse.Namespace) -> int:
    params, config = load_checkpoint(args.checkpoint)
    scheme = get_scheme(args.scheme)
    case = define_case(args.case) if args.case else None
    if case is not None and case.num_classes != config.num_classes:
        raise ValueError(
            f"checkpoint has {config.num_classes} classes but case "
            f"{case.name} has {case.num_classes}"
        )
    samples = _read_signal(Path(args.input))
    stem = Path(args.input).stem
    vote_records = []
    for sub_index, windows in enumerate(segment_signal(samples, scheme)):
        probs, _ = forward(config, params, np.stack(windows), training=False)
        votes = [int(v) for v in probs.argmax(axis=1)]
        final, tie_broken = majority_vote(votes, probs)
        vote_records.append(
            VoteRecord(
                votes=tuple(votes),
                probabilities=probs,
                final=final,
                tie_broken=tie_broken,
                origin=(stem, sub_index),
            )
        )
        label = case.group_letters(final) if case is not None else str(final)
        votes_text = ",".join(
            case.group_letters(v) if case is not None else str(v) for v in votes
        )
        tie = " (tie broken)" if tie_broken else ""
        print(f"instance {sub_index}: votes [{votes_text}] -> {label}{tie}")
    if args.out:
        log_path = Path(args.out) / f"predict_{stem}_votes.csv"
        write_vote_log(vote_records, log_path)
        print(f"vote log {log_path}")
    return 0


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-root",
        default=None,
        help=f"dataset root directory (falls back to ${DATA_ENV_VAR})",
    )
    parser.add_argument(
        "--record-length",
        type=int,
        default=BONN_RECORD_LENGTH,
        help="expected samples per record file",
    )


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=MODEL_NAMES, default="M5")
    parser.add_argument("--fc1", type=int, choices=(20, 40), default=None)
    parser.add_argument("--dropout", type=float, default=None, metavar="R")


def _add_training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lr", type=float, default=1e-3, metavar="R")
    parser.add_argument("--batch", type=int, default=32, metavar="N")
    parser.add_argument("--epochs", type=int, default=50, metavar="N")


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, metavar="N")
    parser.add_argument("--out", default="runs", metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pyrseiz",
        description="Pyramidal 1D-CNN ensemble for EEG classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print the model parameter-count table")
    p.add_argument("models", nargs="*", metavar="MODEL")
    p.add_argument("--all", action="store_true", help="audit every model M1..M8")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("synth", help="write a synthetic Bonn-layout dataset")
    p.add_argument("--classes", type=int, default=3, metavar="N")
    p.add_argument("--records", type=int, default=20, metavar="N")
    p.add_argument("--length", type=int, default=BONN_RECORD_LENGTH, metavar="N")
    p.add_argument("--noise", type=float, default=0.05, metavar="R")
    _add_common_options(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train one model on the full dataset")
    _add_data_options(p)
    p.add_argument("--case", required=True, metavar="SPEC")
    p.add_argument("--scheme", type=int, choices=(1, 2), default=1)
    _add_model_options(p)
    _add_training_options(p)
    _add_common_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="k-fold cross-validation for one case")
    _add_data_options(p)
    p.add_argument("--case", required=True, metavar="SPEC")
    p.add_argument("--scheme", type=int, choices=(1, 2), default=1)
    _add_model_options(p)
    _add_training_options(p)
    _add_common_options(p)
    p.add_argument("--folds", type=int, default=10, metavar="N")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("battery", help="run all 16 benchmark cases")
    _add_data_options(p)
    p.add_argument("--scheme", type=int, choices=(1, 2), default=1)
    _add_model_options(p)
    _add_training_options(p)
    _add_common_options(p)
    p.add_argument("--folds", type=int, default=10, metavar="N")
    p.add_argument("--jobs", type=int, default=1, metavar="N")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("predict", help="classify one record with a checkpoint")
    p.add_argument("--checkpoint", required=True, metavar="CKPT")
    p.add_argument("--input", required=True, metavar="FILE")
    p.add_argument("--scheme", type=int, choices=(1, 2), default=1)
    p.add_argument("--case", default=None, metavar="SPEC",
                   help="optional case spec used to label the vote output")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="directory for the per-instance vote log CSV")
    p.set_defaults(func=cmd_predict)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
