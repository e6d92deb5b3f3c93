"""Prediction export in the scorer's CSV contract.

Rows are `index,task,payload`: class tasks emit one integer (the
modulation id, or the symbol count itself), regression emits the raw
four model outputs, demodulation emits semicolon-joined per-symbol
indices.
"""

from __future__ import annotations

import csv

import numpy as np
import torch

from .rfds import load, normalize_rx
from .trainer import load_checkpoint


def predict(model, cfg, rx: np.ndarray, batch: int = 64) -> list[np.ndarray]:
    """Eval-mode forward over frames (N, 2, L); returns per-example payloads."""
    model.eval()
    payloads: list[np.ndarray] = []
    frames = torch.from_numpy(normalize_rx(rx))
    with torch.no_grad():
        for lo in range(0, len(frames), batch):
            _, logits = model(frames[lo : lo + batch])
            if cfg.task in ("amc", "symbol_count"):
                values = logits.argmax(dim=1).numpy()
                if cfg.task == "symbol_count":
                    values = values + 16  # class index back to the count itself
                payloads.extend(np.asarray(v) for v in values)
            elif cfg.task == "regression":
                payloads.extend(logits.numpy().astype(np.float64))
            else:
                payloads.extend(logits.argmax(dim=2).numpy())
    return payloads


def export_predictions(checkpoint_path, dataset_path, out_path, batch: int = 64) -> int:
    """Run a checkpoint over a dataset and write the prediction CSV.

    Returns the number of rows written (one per example, dataset order).
    """
    model, cfg, _ = load_checkpoint(checkpoint_path)
    data = load(dataset_path)
    if data.task != cfg.task:
        raise ValueError(f"checkpoint is for {cfg.task!r} but dataset holds {data.task!r}")
    if data.frame_length != cfg.frame_length:
        raise ValueError(
            f"frame length mismatch: model {cfg.frame_length}, dataset {data.frame_length}"
        )
    payloads = predict(model, cfg, data.rx, batch=batch)

    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "task", "payload"])
        for index, payload in enumerate(payloads):
            if cfg.task in ("amc", "symbol_count"):
                writer.writerow([index, cfg.task, int(payload)])
            elif cfg.task == "regression":
                writer.writerow([index, cfg.task, *[f"{v:.9g}" for v in payload]])
            else:
                writer.writerow([index, cfg.task, ";".join(str(int(v)) for v in payload)])
    return len(payloads)
