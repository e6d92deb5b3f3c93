"""Hybrid autoencoder/classifier network.

Encoder: Conv1d(k=13, pad=6) + BatchNorm + ReLU blocks with two 2x max
pools, (2, L) -> (256, L/4).  Decoder mirrors it with LeakyReLU and two
nearest-neighbor upsamples back to (2, L); the output layer is a bare
convolution so reconstructions can take any real value.  The latent is
also read as L/4 time tokens of width 256 by a self-attention stack,
flattened, and classified through FC(1024) + BatchNorm + ReLU + Dropout
into the task head.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import ModelConfig


def _conv_block(c_in: int, c_out: int, kernel: int, act: nn.Module) -> nn.Sequential:
    pad = kernel // 2
    return nn.Sequential(nn.Conv1d(c_in, c_out, kernel, padding=pad), nn.BatchNorm1d(c_out), act)


class Encoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        c = cfg.encoder_channels
        k = cfg.kernel_size
        self.blocks = nn.Sequential(
            _conv_block(2, c[0], k, nn.ReLU()),
            nn.MaxPool1d(2),
            _conv_block(c[0], c[1], k, nn.ReLU()),
            nn.MaxPool1d(2),
            _conv_block(c[1], c[2], k, nn.ReLU()),
            _conv_block(c[2], c[3], k, nn.ReLU()),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.blocks(x)


class Decoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        c = cfg.decoder_channels
        k = cfg.kernel_size
        latent = cfg.encoder_channels[-1]
        self.blocks = nn.Sequential(
            _conv_block(latent, c[0], k, nn.LeakyReLU()),
            nn.Upsample(scale_factor=2, mode="nearest"),
            _conv_block(c[0], c[1], k, nn.LeakyReLU()),
            nn.Upsample(scale_factor=2, mode="nearest"),
            _conv_block(c[1], c[2], k, nn.LeakyReLU()),
            nn.Conv1d(c[2], 2, k, padding=k // 2),
        )

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        return self.blocks(z)


class SelfAttentionBlock(nn.Module):
    """Pre-norm multi-head self-attention + feedforward residual block.

    Dropout (the model-wide rate) sits on the attention output and
    inside the feedforward, the usual transformer placements.
    """

    def __init__(self, dim: int, heads: int, lsh: bool, lsh_buckets: int, dropout: float):
        super().__init__()
        if dim % heads:
            raise ValueError("attention dim must divide into heads")
        self.heads = heads
        self.dim = dim
        self.lsh = lsh
        self.lsh_buckets = lsh_buckets
        self.norm1 = nn.LayerNorm(dim)
        self.norm2 = nn.LayerNorm(dim)
        self.qkv = nn.Linear(dim, 3 * dim)
        self.out = nn.Linear(dim, dim)
        self.drop = nn.Dropout(dropout)
        self.ff = nn.Sequential(
            nn.Linear(dim, 4 * dim), nn.ReLU(), nn.Dropout(dropout), nn.Linear(4 * dim, dim)
        )
        if lsh:
            # fixed random projections shared by all heads bucket the tokens
            self.register_buffer("lsh_proj", torch.randn(dim, lsh_buckets))

    def _attend(self, x: torch.Tensor) -> torch.Tensor:
        b, t, _ = x.shape
        h = self.heads
        d = self.dim // h
        q, k, v = self.qkv(x).chunk(3, dim=-1)
        q = q.view(b, t, h, d).transpose(1, 2)
        k = k.view(b, t, h, d).transpose(1, 2)
        v = v.view(b, t, h, d).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / d**0.5
        if self.lsh:
            buckets = (x @ self.lsh_proj).argmax(dim=-1)  # (b, t)
            same = buckets[:, None, :] == buckets[:, :, None]  # (b, t, t)
            scores = scores.masked_fill(~same[:, None, :, :], float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, t, self.dim)
        return self.out(out)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.drop(self._attend(self.norm1(x)))
        return x + self.ff(self.norm2(x))


class Classifier(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.stack = nn.ModuleList(
            SelfAttentionBlock(
                cfg.attn_dim, cfg.attn_heads, cfg.lsh_attention, cfg.lsh_buckets, cfg.dropout
            )
            for _ in range(cfg.attn_depth)
        )
        flat = cfg.latent_tokens * cfg.attn_dim
        self.fc = nn.Sequential(
            nn.Linear(flat, cfg.fc_hidden),
            nn.BatchNorm1d(cfg.fc_hidden),
            nn.ReLU(),
            nn.Dropout(cfg.dropout),
            nn.Linear(cfg.fc_hidden, cfg.head_size),
        )

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        tokens = z.transpose(1, 2)  # (B, L/4, 256): time positions as tokens
        for block in self.stack:
            tokens = block(tokens)
        logits = self.fc(tokens.flatten(1))
        if self.cfg.task == "demod":
            return logits.view(-1, self.cfg.n_symbols, self.cfg.demod_classes)
        return logits


class HybridModel(nn.Module):
    """Shared-latent reconstruction + classification model."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = Encoder(cfg)
        self.decoder = Decoder(cfg)
        self.classifier = Classifier(cfg)

    def forward(self, rx: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """rx (B, 2, L) -> (reconstruction (B, 2, L), task logits)."""
        if rx.shape[1] != 2 or rx.shape[2] != self.cfg.frame_length:
            raise ValueError(
                f"expected input (B, 2, {self.cfg.frame_length}), got {tuple(rx.shape)}"
            )
        z = self.encoder(rx)
        return self.decoder(z), self.classifier(z)

    def encode(self, rx: torch.Tensor) -> torch.Tensor:
        return self.encoder(rx)
