"""Prediction files and task scoring.

Prediction CSV contract (shared with any model front end):

    index,task,payload
    0,amc,7
    0,regression,0.7071,0.7071,0.5,12.0      (cos, sin, 100*df, snr)
    0,symbol_count,24                        (the predicted count itself)
    0,demod,0;3;1;2                          (per-symbol indices)

Scores are reported as a confusion matrix and an accuracy-versus-SNR
curve for the classification tasks, per-target error statistics plus
scatter pairs for regression, and per-modulation symbol accuracy for
demodulation.  SNR bins are 2 dB wide by true Es/N0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .constellations import MODULATION_NAMES

SCATTER_CAP = 10_000


class PredictionFormatError(ValueError):
    """Raised for malformed or mismatched prediction files."""


@dataclass(frozen=True)
class PredictionRecord:
    example_index: int
    task: str
    payload: object  # int for class tasks, 4 floats for regression, index array for demod


@dataclass
class ConfusionMatrix:
    labels: list
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.labels), len(self.labels)):
            raise ValueError("confusion matrix must be square over labels")

    @property
    def accuracy(self) -> float:
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0


@dataclass
class SnrCurve:
    bin_edges: np.ndarray
    accuracy: np.ndarray
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.accuracy = np.asarray(self.accuracy, dtype=float)
        if len(self.accuracy) != len(self.bin_edges) - 1:
            raise ValueError("need one accuracy value per bin")

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _snr_bin_edges(snrs: np.ndarray, width: float) -> np.ndarray:
    lo = width * np.floor(snrs.min() / width)
    hi = width * np.floor(snrs.max() / width) + width
    return np.arange(lo, hi + width / 2, width)


def _binned_accuracy(snrs: np.ndarray, correct: np.ndarray, width: float) -> SnrCurve:
    edges = _snr_bin_edges(snrs, width)
    which = np.clip(np.digitize(snrs, edges) - 1, 0, len(edges) - 2)
    counts = np.bincount(which, minlength=len(edges) - 1)
    hits = np.bincount(which, weights=correct.astype(float), minlength=len(edges) - 1)
    with np.errstate(invalid="ignore"):
        acc = np.where(counts > 0, hits / np.maximum(counts, 1), np.nan)
    return SnrCurve(edges, acc, counts)


def _check_indices(preds: list[PredictionRecord], n: int):
    seen = {p.example_index for p in preds}
    for i in range(n):
        if i not in seen:
            raise PredictionFormatError(f"index mismatch: no prediction for example {i}")
    if len(preds) != n:
        extra = sorted(seen - set(range(n)))
        raise PredictionFormatError(f"index mismatch: unexpected indices {extra[:5]}")


def score_classification(
    preds: list[PredictionRecord],
    truth_labels: np.ndarray,
    truth_snrs: np.ndarray,
    label_space: list,
    bin_width: float = 2.0,
) -> tuple[ConfusionMatrix, SnrCurve]:
    """Confusion counts plus accuracy binned by true Es/N0."""
    n = len(truth_labels)
    _check_indices(preds, n)
    rank = {label: k for k, label in enumerate(label_space)}
    counts = np.zeros((len(label_space), len(label_space)), dtype=np.int64)
    correct = np.zeros(n, dtype=bool)
    for p in preds:
        truth = truth_labels[p.example_index]
        guess = int(p.payload)
        if guess not in rank:
            raise PredictionFormatError(
                f"prediction {guess} for example {p.example_index} outside label space"
            )
        counts[rank[truth], rank[guess]] += 1
        correct[p.example_index] = guess == truth
    return ConfusionMatrix(list(label_space), counts), _binned_accuracy(
        np.asarray(truth_snrs, dtype=float), correct, bin_width
    )


def wrap_phase(x: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)


def score_regression(
    preds: list[PredictionRecord],
    truth_phase: np.ndarray,
    truth_freq: np.ndarray,
    truth_snr: np.ndarray,
    scatter_cap: int = SCATTER_CAP,
) -> dict:
    """Per-target MAE/RMSE and (truth, prediction) scatter pairs.

    The four-component payload decodes as phase = atan2(sin, cos),
    frequency = third component / 100, SNR passthrough.  Phase error is
    wrap-safe.
    """
    n = len(truth_phase)
    _check_indices(preds, n)
    pred_phase = np.empty(n)
    pred_freq = np.empty(n)
    pred_snr = np.empty(n)
    for p in preds:
        payload = np.asarray(p.payload, dtype=float)
        if payload.shape != (4,):
            raise PredictionFormatError(
                f"regression payload for example {p.example_index} must have 4 values"
            )
        pred_phase[p.example_index] = np.arctan2(payload[1], payload[0])
        pred_freq[p.example_index] = payload[2] / 100.0
        pred_snr[p.example_index] = payload[3]

    phase_err = wrap_phase(pred_phase - truth_phase)
    freq_err = pred_freq - truth_freq
    snr_err = pred_snr - truth_snr

    def stats(err):
        return {"mae": float(np.mean(np.abs(err))), "rmse": float(np.sqrt(np.mean(err**2)))}

    keep = np.arange(n)
    if n > scatter_cap:
        keep = np.linspace(0, n - 1, scatter_cap).astype(int)
    return {
        "phase": stats(phase_err),
        "freq": stats(freq_err),
        "snr": stats(snr_err),
        "scatter": {
            "phase": np.column_stack([truth_phase[keep], pred_phase[keep]]),
            "freq": np.column_stack([truth_freq[keep], pred_freq[keep]]),
            "snr": np.column_stack([truth_snr[keep], pred_snr[keep]]),
        },
    }


def score_demod(
    preds: list[PredictionRecord],
    truth_symbols: list[np.ndarray],
    truth_mods: np.ndarray,
    truth_snrs: np.ndarray,
    bin_width: float = 2.0,
) -> dict:
    """Per-symbol accuracy, reported per modulation and per SNR bin."""
    n = len(truth_symbols)
    _check_indices(preds, n)
    frac_correct = np.empty(n)
    for p in preds:
        truth = truth_symbols[p.example_index]
        guess = np.asarray(p.payload, dtype=np.int64)
        if guess.shape != truth.shape:
            raise PredictionFormatError(
                f"demod payload for example {p.example_index}: "
                f"{len(guess)} symbols, expected {len(truth)}"
            )
        frac_correct[p.example_index] = np.mean(guess == truth)

    truth_mods = np.asarray(truth_mods)
    truth_snrs = np.asarray(truth_snrs, dtype=float)
    per_mod = {}
    for mod in sorted(set(truth_mods.tolist())):
        mask = truth_mods == mod
        edges = _snr_bin_edges(truth_snrs[mask], bin_width)
        which = np.clip(np.digitize(truth_snrs[mask], edges) - 1, 0, len(edges) - 2)
        counts = np.bincount(which, minlength=len(edges) - 1)
        hits = np.bincount(which, weights=frac_correct[mask], minlength=len(edges) - 1)
        acc = np.where(counts > 0, hits / np.maximum(counts, 1), np.nan)
        per_mod[MODULATION_NAMES[mod]] = {
            "accuracy": float(np.mean(frac_correct[mask])),
            "curve": SnrCurve(edges, acc, counts),
        }
    return {"accuracy": float(np.mean(frac_correct)), "per_modulation": per_mod}


# ---------------------------------------------------------------------------
# prediction file io


def write_predictions(records: list[PredictionRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "task", "payload"])
        for r in records:
            if r.task == "regression":
                payload = [f"{v:.9g}" for v in np.asarray(r.payload, dtype=float)]
                w.writerow([r.example_index, r.task, *payload])
            elif r.task == "demod":
                joined = ";".join(str(int(v)) for v in np.asarray(r.payload).ravel())
                w.writerow([r.example_index, r.task, joined])
            else:
                w.writerow([r.example_index, r.task, int(r.payload)])


def read_predictions(path) -> list[PredictionRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["index", "task"]:
            raise PredictionFormatError(f"{path}: missing prediction header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                index = int(row[0])
                task = row[1]
                if task == "regression":
                    payload = np.array([float(v) for v in row[2:6]])
                    if len(row) != 6:
                        raise ValueError("regression rows need 4 payload values")
                elif task == "demod":
                    payload = np.array([int(v) for v in row[2].split(";")], dtype=np.int64)
                else:
                    payload = int(row[2])
            except (ValueError, IndexError) as err:
                raise PredictionFormatError(f"{path}:{lineno}: bad row ({err})") from err
            records.append(PredictionRecord(index, task, payload))
    return records


# ---------------------------------------------------------------------------
# score exports


def confusion_to_csv(cm: ConfusionMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["truth\\prediction", *cm.labels])
        for label, row in zip(cm.labels, cm.counts):
            w.writerow([label, *row.tolist()])


def curve_to_csv(curve: SnrCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_lo_db", "snr_hi_db", "accuracy", "count"])
        counts = curve.counts if curve.counts is not None else [0] * len(curve.accuracy)
        for lo, hi, acc, cnt in zip(curve.bin_edges[:-1], curve.bin_edges[1:], curve.accuracy, counts):
            w.writerow([lo, hi, "" if np.isnan(acc) else f"{acc:.6f}", int(cnt)])


def scatter_to_csv(pairs: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["truth", "prediction"])
        for t, p in pairs:
            w.writerow([f"{t:.9g}", f"{p:.9g}"])
