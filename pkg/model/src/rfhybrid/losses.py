"""Loss assembly and regression target coding.

Total loss = sum_i lambda_Ci * classifier_term_i + lambda_R * MSE(tx, tx').
Classification tasks contribute one cross-entropy term; regression
contributes four per-component mean-square terms; demodulation sums one
cross-entropy per symbol position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F


@dataclass(frozen=True)
class LossWeights:
    lambda_r: float
    lambda_c: tuple[float, ...]  # one entry per classifier term (4 for regression)

    def __post_init__(self):
        if self.lambda_r < 0 or any(v < 0 for v in self.lambda_c):
            raise ValueError("loss weights must be nonnegative")

    def to_json(self) -> dict:
        return {"lambda_r": self.lambda_r, "lambda_c": list(self.lambda_c)}

    @classmethod
    def from_json(cls, d: dict) -> "LossWeights":
        return cls(float(d["lambda_r"]), tuple(float(v) for v in d["lambda_c"]))


def reconstruction_loss(tx: torch.Tensor, tx_hat: torch.Tensor) -> torch.Tensor:
    return F.mse_loss(tx_hat, tx)


def classifier_terms(task: str, logits: torch.Tensor, labels: torch.Tensor) -> list[torch.Tensor]:
    """Per-term classifier losses (batch means), matching LossWeights order."""
    if task in ("amc", "symbol_count"):
        return [F.cross_entropy(logits, labels)]
    if task == "regression":
        if logits.shape[-1] != 4 or labels.shape[-1] != 4:
            raise ValueError("regression expects 4 outputs and 4 targets")
        return [F.mse_loss(logits[:, i], labels[:, i]) for i in range(4)]
    if task == "demod":
        b, n, k = logits.shape
        if labels.shape != (b, n):
            raise ValueError(f"demod labels must be {(b, n)}, got {tuple(labels.shape)}")
        per_symbol = F.cross_entropy(
            logits.reshape(b * n, k), labels.reshape(b * n), reduction="none"
        ).reshape(b, n)
        return [per_symbol.sum(dim=1).mean()]  # one CE term per symbol, summed
    raise ValueError(f"unknown task {task!r}")


def total_loss(
    task: str,
    tx: torch.Tensor,
    tx_hat: torch.Tensor,
    logits: torch.Tensor,
    labels: torch.Tensor,
    weights: LossWeights,
) -> tuple[torch.Tensor, dict]:
    """Weighted total plus a per-term breakdown for schedule monitoring."""
    terms = classifier_terms(task, logits, labels)
    if len(weights.lambda_c) != len(terms):
        raise ValueError(
            f"{task} has {len(terms)} classifier terms but got "
            f"{len(weights.lambda_c)} weights"
        )
    recon = reconstruction_loss(tx, tx_hat)
    total = weights.lambda_r * recon
    for lam, term in zip(weights.lambda_c, terms):
        total = total + lam * term
    breakdown = {"reconstruction": float(recon.detach())}
    for idx, term in enumerate(terms):
        breakdown[f"classifier_{idx}"] = float(term.detach())
    return total, breakdown


def encode_regression_targets(phase: np.ndarray, freq: np.ndarray, snr_db: np.ndarray) -> np.ndarray:
    """Channel parameters -> model targets (cos, sin, 100*freq, snr)."""
    phase = np.asarray(phase, dtype=np.float64)
    return np.stack(
        [np.cos(phase), np.sin(phase), 100.0 * np.asarray(freq), np.asarray(snr_db)],
        axis=-1,
    ).astype(np.float32)


def decode_regression(outputs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Model outputs -> (phase, freq, snr_db); scale-invariant in the pair."""
    outputs = np.asarray(outputs, dtype=np.float64)
    phase = np.arctan2(outputs[..., 1], outputs[..., 0])
    return phase, outputs[..., 2] / 100.0, outputs[..., 3]
