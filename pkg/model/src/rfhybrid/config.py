"""Model hyperparameters.

The default numbers reproduce the published layer plan: a four-block
convolutional encoder squeezing (2, L) to a (256, L/4) latent, a
mirrored decoder, and an attention classifier (dim 256, depth 2,
8 heads) whose flattened output feeds a 1024-wide fully connected
stage with batch norm, ReLU, and 0.2 dropout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

HEAD_SIZES = {"amc": 13, "regression": 4, "symbol_count": 17}


@dataclass(frozen=True)
class ModelConfig:
    frame_length: int
    task: str
    demod_classes: int = 0  # constellation size, demod task only
    encoder_channels: tuple[int, ...] = (128, 256, 256, 256)
    decoder_channels: tuple[int, ...] = (128, 128, 64)
    kernel_size: int = 13
    attn_dim: int = 256
    attn_depth: int = 2
    attn_heads: int = 8
    fc_hidden: int = 1024
    dropout: float = 0.2
    lsh_attention: bool = False
    lsh_buckets: int = 8

    def __post_init__(self):
        if self.frame_length % 4:
            raise ValueError("frame_length must be divisible by 4")
        if self.task == "demod":
            if self.demod_classes < 2:
                raise ValueError("demod task needs the constellation size")
        elif self.task not in HEAD_SIZES:
            raise ValueError(f"unknown task {self.task!r}")
        if self.encoder_channels[-1] != self.attn_dim:
            raise ValueError("latent width must match the attention dimension")

    @property
    def latent_tokens(self) -> int:
        return self.frame_length // 4

    @property
    def n_symbols(self) -> int:
        return self.frame_length // 4 if self.task == "demod" else 0

    @property
    def head_size(self) -> int:
        if self.task == "demod":
            return self.n_symbols * self.demod_classes
        return HEAD_SIZES[self.task]

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_json(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        for key in ("encoder_channels", "decoder_channels"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def tiny_config(task: str, frame_length: int = 32, demod_classes: int = 0) -> ModelConfig:
    """Miniature layout for finite-difference gradient checks."""
    return ModelConfig(
        frame_length=frame_length,
        task=task,
        demod_classes=demod_classes,
        encoder_channels=(8, 8, 8, 8),
        decoder_channels=(8, 8, 8),
        kernel_size=5,
        attn_dim=8,
        attn_depth=1,
        attn_heads=2,
        fc_hidden=16,
        dropout=0.0,
    )
