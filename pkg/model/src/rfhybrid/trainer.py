"""Task training recipes: schedules, the optimization loop, and logs.

Each task carries a paper-scale plan (published epoch counts and loss
weight schedules) and a desk-scale plan: the same schedule shape with
epoch boundaries compressed proportionally so a run fits a small CPU
budget (classification 128 -> 16 with the switch at 8; regression
500 -> 64 with boundaries 19/38/51; demodulation 256 -> 8 with the
switch at 4; symbol count is already 8 epochs at paper scale).

The training log is one CSV row per epoch holding the active loss
weights, per-term training losses, and the validation metric, so
schedule fidelity is assertable from the log alone.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .config import ModelConfig
from .losses import LossWeights, encode_regression_targets, total_loss
from .net import HybridModel
from .rfds import RfdsData, load, normalize_rx

TASKS = ("amc", "regression", "symbol_count", "demod")


@dataclass(frozen=True)
class ScheduleSpan:
    start: int  # inclusive
    end: int  # exclusive
    weights: LossWeights

    def to_json(self) -> dict:
        return {"start": self.start, "end": self.end, "weights": self.weights.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "ScheduleSpan":
        return cls(int(d["start"]), int(d["end"]), LossWeights.from_json(d["weights"]))


@dataclass(frozen=True)
class TrainPlan:
    task: str
    epochs: int
    schedule: tuple[ScheduleSpan, ...]
    learning_rate: float = 1e-3
    batch_size: int = 32
    desk_scale: bool = True

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        spans = sorted(self.schedule, key=lambda s: s.start)
        if not spans or spans[0].start != 0 or spans[-1].end != self.epochs:
            raise ValueError("schedule must cover [0, epochs)")
        for a, b in zip(spans, spans[1:]):
            if a.end != b.start:
                raise ValueError("schedule spans must partition the epochs contiguously")

    def weights_for_epoch(self, epoch: int) -> LossWeights:
        for span in self.schedule:
            if span.start <= epoch < span.end:
                return span.weights
        raise ValueError(f"epoch {epoch} outside plan")

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "epochs": self.epochs,
            "schedule": [s.to_json() for s in self.schedule],
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "desk_scale": self.desk_scale,
        }

    @classmethod
    def from_json(cls, d: dict) -> "TrainPlan":
        return cls(
            task=d["task"],
            epochs=int(d["epochs"]),
            schedule=tuple(ScheduleSpan.from_json(s) for s in d["schedule"]),
            learning_rate=float(d.get("learning_rate", 1e-3)),
            batch_size=int(d.get("batch_size", 32)),
            desk_scale=bool(d.get("desk_scale", True)),
        )


def _two_phase(task: str, epochs: int, switch: int, lr_first: float, lr_second: float,
               desk: bool) -> TrainPlan:
    return TrainPlan(
        task=task,
        epochs=epochs,
        schedule=(
            ScheduleSpan(0, switch, LossWeights(lr_first, (1.0,))),
            ScheduleSpan(switch, epochs, LossWeights(lr_second, (1.0,))),
        ),
        desk_scale=desk,
    )


def _regression_plan(epochs: int, bounds: tuple[int, int, int], desk: bool) -> TrainPlan:
    b1, b2, b3 = bounds
    return TrainPlan(
        task="regression",
        epochs=epochs,
        schedule=(
            ScheduleSpan(0, b1, LossWeights(0.001, (1.0, 1.0, 1.0, 1.0))),
            ScheduleSpan(b1, b2, LossWeights(0.001, (1.0, 1.0, 1.0, 0.01))),
            ScheduleSpan(b2, b3, LossWeights(0.001, (1.0, 1.0, 0.2, 0.01))),
            ScheduleSpan(b3, epochs, LossWeights(1.0, (1.0, 1.0, 1.0, 1.0))),
        ),
        desk_scale=desk,
    )


def default_plan(task: str, desk_scale: bool = True) -> TrainPlan:
    if task == "amc":
        return _two_phase("amc", 16, 8, 0.001, 1.0, True) if desk_scale else \
            _two_phase("amc", 128, 64, 0.001, 1.0, False)
    if task == "regression":
        return _regression_plan(64, (19, 38, 51), True) if desk_scale else \
            _regression_plan(500, (150, 300, 400), False)
    if task == "symbol_count":
        plan = TrainPlan(
            task="symbol_count",
            epochs=8,
            schedule=(ScheduleSpan(0, 8, LossWeights(1.0, (1.0,))),),
            desk_scale=desk_scale,
        )
        return plan
    if task == "demod":
        return _two_phase("demod", 8, 4, 0.01, 1.0, True) if desk_scale else \
            _two_phase("demod", 256, 128, 0.01, 1.0, False)
    raise ValueError(f"unknown task {task!r}")


def task_labels(data: RfdsData) -> np.ndarray:
    if data.task == "amc":
        return data.modulation_id
    if data.task == "symbol_count":
        return data.n_symbols - 16
    if data.task == "regression":
        return encode_regression_targets(data.phase_offset, data.freq_offset, data.snr_db)
    if data.task == "demod":
        return np.stack(data.symbols)
    raise ValueError(f"unknown task {data.task!r}")


def model_config_for(data: RfdsData, **overrides) -> ModelConfig:
    demod_classes = 0
    if data.task == "demod":
        mods = set(data.modulation_id.tolist()) or {
            data.header["preset"]["modulations"][0]
        }
        if len(mods) != 1:
            raise ValueError("demod datasets must carry a single modulation")
        demod_classes = len(data.constellations[mods.pop()].points)
    return ModelConfig(
        frame_length=data.frame_length, task=data.task, demod_classes=demod_classes, **overrides
    )


def _tensors(data: RfdsData) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    rx = torch.from_numpy(normalize_rx(data.rx))
    tx = torch.from_numpy(data.tx.copy())
    labels = task_labels(data)
    label_tensor = torch.from_numpy(np.asarray(labels))
    return rx, tx, label_tensor


def _validation_metric(task: str, model: HybridModel, rx, tx, labels, batch: int = 64) -> float:
    """Accuracy for class tasks, per-symbol accuracy for demod,
    negative phase-MAE for regression (so larger is always better)."""
    model.eval()
    hits = total = 0
    phase_err = []
    with torch.no_grad():
        for lo in range(0, len(rx), batch):
            _, logits = model(rx[lo : lo + batch])
            ref = labels[lo : lo + batch]
            if task in ("amc", "symbol_count"):
                hits += int((logits.argmax(dim=1) == ref).sum())
                total += len(ref)
            elif task == "demod":
                pred = logits.argmax(dim=2)
                hits += int((pred == ref).sum())
                total += ref.numel()
            else:
                pred = torch.atan2(logits[:, 1], logits[:, 0])
                truth = torch.atan2(ref[:, 1], ref[:, 0])
                delta = torch.remainder(pred - truth + np.pi, 2 * np.pi) - np.pi
                phase_err.append(delta.abs())
    model.train()
    if task == "regression":
        return -float(torch.cat(phase_err).mean())
    return hits / total if total else 0.0


def run_training(
    plan: TrainPlan,
    train_path,
    val_path,
    out_dir,
    model_overrides: dict | None = None,
    seed: int = 0,
) -> dict:
    """Minimize the weighted loss; write checkpoint.pt and training_log.csv.

    Returns a summary with the per-epoch log rows and the final
    validation metric.
    """
    train_data = load(train_path)
    val_data = load(val_path)
    if train_data.task != plan.task:
        raise ValueError(f"plan is for {plan.task!r} but dataset holds {train_data.task!r}")
    if val_data.task != plan.task:
        raise ValueError("validation dataset task mismatch")

    torch.manual_seed(seed)
    cfg = model_config_for(train_data, **(model_overrides or {}))
    model = HybridModel(cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=plan.learning_rate)

    rx, tx, labels = _tensors(train_data)
    val_rx, val_tx, val_labels = _tensors(val_data)

    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, "training_log.csv")
    n_terms = len(plan.schedule[0].weights.lambda_c)
    fieldnames = (
        ["epoch", "lambda_r"]
        + [f"lambda_c{i}" for i in range(n_terms)]
        + ["loss_total", "loss_reconstruction"]
        + [f"loss_classifier_{i}" for i in range(n_terms)]
        + ["val_metric"]
    )
    rows = []
    generator = torch.Generator().manual_seed(seed)
    model.train()
    for epoch in range(plan.epochs):
        weights = plan.weights_for_epoch(epoch)
        order = torch.randperm(len(rx), generator=generator)
        sums: dict[str, float] = {}
        total_sum = 0.0
        n_batches = 0
        for lo in range(0, len(order), plan.batch_size):
            idx = order[lo : lo + plan.batch_size]
            optimizer.zero_grad()
            tx_hat, logits = model(rx[idx])
            loss, breakdown = total_loss(plan.task, tx[idx], tx_hat, logits, labels[idx], weights)
            loss.backward()
            optimizer.step()
            total_sum += float(loss.detach())
            n_batches += 1
            for key, value in breakdown.items():
                sums[key] = sums.get(key, 0.0) + value
        val_metric = _validation_metric(plan.task, model, val_rx, val_tx, val_labels)
        row = {
            "epoch": epoch,
            "lambda_r": weights.lambda_r,
            "loss_total": total_sum / n_batches,
            "loss_reconstruction": sums["reconstruction"] / n_batches,
            "val_metric": val_metric,
        }
        for i, lam in enumerate(weights.lambda_c):
            row[f"lambda_c{i}"] = lam
            row[f"loss_classifier_{i}"] = sums[f"classifier_{i}"] / n_batches
        rows.append(row)

    with open(log_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)

    checkpoint_path = os.path.join(out_dir, "checkpoint.pt")
    torch.save(
        {
            "model_config": cfg.to_json(),
            "state_dict": model.state_dict(),
            "plan": plan.to_json(),
            "seed": seed,
        },
        checkpoint_path,
    )
    return {
        "log": rows,
        "log_path": log_path,
        "checkpoint_path": checkpoint_path,
        "val_metric": rows[-1]["val_metric"] if rows else None,
    }


def classifier_loss_medians(rows: list[dict]) -> tuple[float, float]:
    """Median first-term classifier loss over the first and last 10% of epochs."""
    losses = [r["loss_classifier_0"] for r in rows]
    k = max(1, len(losses) // 10)
    return float(np.median(losses[:k])), float(np.median(losses[-k:]))


def load_checkpoint(path) -> tuple[HybridModel, ModelConfig, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ModelConfig.from_json(payload["model_config"])
    model = HybridModel(cfg)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, cfg, payload
