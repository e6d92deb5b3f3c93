"""Command-line front end: generate, inspect, score, oracle.

Exit codes are stable for scripting: 0 success, 1 runtime/IO failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace

import numpy as np

from . import __version__
from .constellations import MODULATION_IDS, MODULATION_NAMES, build_constellation
from .dataset import PRESETS, TaskPreset, generate_records, read_dataset, write_dataset
from .oracles import oracle_demod
from .rng import mix64
from .scoring import (
    PredictionFormatError,
    PredictionRecord,
    confusion_to_csv,
    curve_to_csv,
    read_predictions,
    scatter_to_csv,
    score_classification,
    score_demod,
    score_regression,
    write_predictions,
)

# salt mixed into the base seed for --split val, so train and val files
# drawn from the same user seed never share example streams
VAL_SPLIT_SALT = 0x56414C5F53504C54


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _resolve_preset(args) -> TaskPreset:
    if args.config:
        try:
            with open(args.config) as fh:
                preset = TaskPreset.from_json(json.load(fh))
        except FileNotFoundError as err:
            raise CliError(f"config file not found: {args.config}") from err
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as err:
            raise CliError(f"bad config {args.config}: {err}") from err
    else:
        if args.preset not in PRESETS:
            raise CliError(
                f"unknown preset {args.preset!r}; valid presets: " + ", ".join(sorted(PRESETS))
            )
        preset = PRESETS[args.preset]

    if args.snr_min is not None or args.snr_max is not None:
        lo = args.snr_min if args.snr_min is not None else preset.profile.snr_range[0]
        hi = args.snr_max if args.snr_max is not None else preset.profile.snr_range[1]
        if lo > hi:
            raise CliError(f"--snr-min {lo} exceeds --snr-max {hi}")
        preset = replace(preset, profile=replace(preset.profile, snr_range=(lo, hi)))
    if args.modulations:
        ids = []
        for token in args.modulations.split(","):
            token = token.strip()
            try:
                ids.append(build_constellation(int(token) if token.isdigit() else token).id)
            except ValueError as err:
                raise CliError(str(err)) from err
        preset = replace(preset, modulations=tuple(ids))
    return preset


def cmd_generate(args) -> int:
    preset = _resolve_preset(args)
    if args.split == "val":
        base_seed = mix64(args.seed ^ VAL_SPLIT_SALT)
        count = preset.val_count
    else:
        base_seed = args.seed
        count = preset.train_count
    if args.count is not None:
        count = args.count

    started = time.perf_counter()
    records = generate_records(preset, count, base_seed, workers=args.threads)
    try:
        write_dataset(records, args.out, preset, base_seed, count)
    except OSError as err:
        raise CliError(f"cannot write {args.out}: {err}", code=1) from err
    duration = time.perf_counter() - started

    manifest = {
        "tool_version": __version__,
        "dataset": str(args.out),
        "example_count": count,
        "base_seed": base_seed,
        "user_seed": args.seed,
        "split": args.split,
        "preset": preset.to_json(),
        "duration_seconds": round(duration, 3),
    }
    manifest_path = str(args.out) + ".manifest.json"
    try:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    except OSError as err:
        raise CliError(f"cannot write {manifest_path}: {err}", code=1) from err
    print(f"wrote {count} examples to {args.out} in {duration:.2f}s (seed {base_seed})")
    return 0


def _open_dataset(path):
    try:
        return read_dataset(path)
    except FileNotFoundError as err:
        raise CliError(f"dataset not found: {path}", code=1) from err
    except ValueError as err:
        raise CliError(str(err)) from err


def cmd_inspect(args) -> int:
    with _open_dataset(args.dataset) as reader:
        preset = reader.preset
        print(f"file:          {args.dataset}")
        print(f"task:          {preset.task}")
        print(f"examples:      {reader.example_count}")
        print(f"frame_length:  {reader.frame_length}")
        print(f"base_seed:     {reader.header['base_seed']}")
        print(f"profile:       {preset.profile.name}")
        mods = ", ".join(MODULATION_NAMES[m] for m in preset.modulations)
        print(f"modulations:   {mods}")
        if args.index is None:
            return 0
        if not 0 <= args.index < reader.example_count:
            raise CliError(
                f"index {args.index} out of range (dataset holds {reader.example_count})"
            )
        ex = reader.get(args.index)
        print(f"--- example {args.index} ---")
        print(f"modulation:    {MODULATION_NAMES[ex.modulation_id]} (id {ex.modulation_id})")
        print(f"n_symbols:     {ex.n_symbols}")
        print(f"sps:           {ex.sps}")
        print(f"beta:          {ex.beta:.6g}")
        print(f"snr_db:        {ex.channel.snr_db:.6g}")
        print(f"phase_offset:  {ex.channel.phase_offset:.6g}")
        print(f"freq_offset:   {ex.channel.freq_offset:.6g}")
        print(f"fading:        {'on' if ex.channel.fading_enabled else 'off'}"
              + (f" (eta {ex.channel.fading_eta:.6g})" if ex.channel.fading_enabled else ""))
        print(f"example_seed:  {ex.example_seed}")
        if args.iq_csv:
            try:
                with open(args.iq_csv, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["sample", "tx_i", "tx_q", "rx_i", "rx_q"])
                    for k in range(len(ex.tx)):
                        w.writerow(
                            [k, f"{ex.tx.i[k]:.9g}", f"{ex.tx.q[k]:.9g}",
                             f"{ex.rx.i[k]:.9g}", f"{ex.rx.q[k]:.9g}"]
                        )
            except OSError as err:
                raise CliError(f"cannot write {args.iq_csv}: {err}", code=1) from err
            print(f"wrote I/Q samples to {args.iq_csv}")
    return 0


def _score_outputs(args, reader, preds) -> dict:
    import os

    task = reader.preset.task
    os.makedirs(args.out_dir, exist_ok=True)
    out = lambda name: os.path.join(args.out_dir, name)  # noqa: E731
    summary: dict = {"task": task, "examples": reader.example_count}

    if task in ("amc", "symbol_count"):
        labels, snrs = [], []
        for ex in reader:
            labels.append(ex.modulation_id if task == "amc" else ex.n_symbols)
            snrs.append(ex.channel.snr_db)
        label_space = list(range(13)) if task == "amc" else list(range(16, 33))
        cm, curve = score_classification(preds, np.array(labels), np.array(snrs), label_space)
        if task == "amc":
            cm.labels = [MODULATION_NAMES[i] for i in cm.labels]
        confusion_to_csv(cm, out("confusion.csv"))
        curve_to_csv(curve, out("snr_curve.csv"))
        summary["accuracy"] = cm.accuracy
    elif task == "regression":
        phase, freq, snr = [], [], []
        for ex in reader:
            phase.append(ex.channel.phase_offset)
            freq.append(ex.channel.freq_offset)
            snr.append(ex.channel.snr_db)
        result = score_regression(preds, np.array(phase), np.array(freq), np.array(snr))
        for target in ("phase", "freq", "snr"):
            scatter_to_csv(result["scatter"][target], out(f"scatter_{target}.csv"))
            summary[f"{target}_mae"] = result[target]["mae"]
            summary[f"{target}_rmse"] = result[target]["rmse"]
    else:  # demod
        symbols, mods, snrs = [], [], []
        for ex in reader:
            symbols.append(ex.symbols.indices)
            mods.append(ex.modulation_id)
            snrs.append(ex.channel.snr_db)
        result = score_demod(preds, symbols, np.array(mods), np.array(snrs))
        summary["accuracy"] = result["accuracy"]
        for name, entry in result["per_modulation"].items():
            curve_to_csv(entry["curve"], out(f"snr_curve_{name}.csv"))
            summary[f"accuracy_{name}"] = entry["accuracy"]

    lines = [f"{key}: {value}" for key, value in summary.items()]
    with open(out("summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return summary


def cmd_score(args) -> int:
    with _open_dataset(args.dataset) as reader:
        if reader.preset.task != args.task:
            raise CliError(
                f"task mismatch: dataset is {reader.preset.task!r}, requested {args.task!r}"
            )
        try:
            preds = read_predictions(args.predictions)
        except FileNotFoundError as err:
            raise CliError(f"predictions not found: {args.predictions}", code=1) from err
        bad = [p for p in preds if p.task != args.task]
        if bad:
            raise CliError(
                f"task mismatch: prediction file holds {bad[0].task!r} rows, expected {args.task!r}"
            )
        try:
            _score_outputs(args, reader, preds)
        except PredictionFormatError as err:
            raise CliError(str(err)) from err
    return 0


def cmd_oracle(args) -> int:
    with _open_dataset(args.dataset) as reader:
        if reader.preset.task != "demod":
            raise CliError(
                f"oracle demodulation needs a demod dataset, got {reader.preset.task!r}"
            )
        n_scatterers = int(reader.header.get("n_scatterers", 64))
        records = []
        for index, ex in enumerate(reader):
            indices = oracle_demod(
                ex,
                correct_channel=(args.mode == "corrected"),
                rrc_span=reader.preset.rrc_span,
                n_scatterers=n_scatterers,
            )
            records.append(PredictionRecord(index, "demod", indices))
        try:
            write_predictions(records, args.out)
        except OSError as err:
            raise CliError(f"cannot write {args.out}: {err}", code=1) from err
    print(f"wrote {len(records)} oracle predictions ({args.mode}) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfsynth",
        description="Deterministic RF baseband dataset synthesizer and scoring tools",
    )
    parser.add_argument("--version", action="version", version=f"rfsynth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate an RFDS dataset file")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="built-in preset name (e.g. amc-desk)")
    src.add_argument("--config", help="JSON file describing a task preset")
    g.add_argument("--seed", type=int, required=True, help="base seed (64-bit)")
    g.add_argument("--out", required=True, help="output .rfds path")
    g.add_argument("--split", choices=("train", "val"), default="train")
    g.add_argument("--count", type=int, help="override the preset example count")
    g.add_argument("--snr-min", type=float, help="override profile SNR lower bound (dB)")
    g.add_argument("--snr-max", type=float, help="override profile SNR upper bound (dB)")
    g.add_argument("--modulations", help="comma-separated modulation ids or names")
    g.add_argument("--threads", type=int, default=1, help="generation worker processes")
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("inspect", help="print dataset header or one example")
    i.add_argument("dataset")
    i.add_argument("--index", type=int, help="example index to dump")
    i.add_argument("--iq-csv", help="write the example's I/Q samples as CSV")
    i.set_defaults(func=cmd_inspect)

    s = sub.add_parser("score", help="score a prediction file against a dataset")
    s.add_argument("--dataset", required=True)
    s.add_argument("--predictions", required=True)
    s.add_argument("--task", required=True, choices=("amc", "regression", "symbol_count", "demod"))
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_score)

    o = sub.add_parser("oracle", help="run the matched-filter oracle over a demod dataset")
    o.add_argument("--dataset", required=True)
    o.add_argument("--mode", choices=("corrected", "raw"), default="corrected")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
