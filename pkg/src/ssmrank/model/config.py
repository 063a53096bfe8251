"""Model architecture configuration."""

from __future__ import annotations

from dataclasses import dataclass, fields

from ..errors import ValidationError

BLOCK_KINDS = ("mamba1", "mamba2", "attention")


@dataclass(frozen=True)
class ModelConfig:
    """Shape of a stacked causal scoring model.

    ``state_size`` is the per-channel latent width of the SSM blocks;
    ``head_dim``/``n_heads`` partition the mixer width for the scalar-identity
    and attention blocks respectively. ``eos_id`` and ``pad_id`` mirror the
    byte tokenizer's specials so scoring can locate each sequence's end
    marker.
    """

    vocab_size: int
    d_model: int
    n_layers: int
    block_kind: str
    state_size: int = 16
    head_dim: int = 4
    n_heads: int = 4
    expand_factor: int = 2
    local_conv_width: int = 4
    max_seq_len: int = 2048
    chunk_len: int = 16
    ssd_impl: str = "chunked"  # chunked | sequential evaluation of mamba2 blocks
    eos_id: int = 257
    pad_id: int = 256

    def __post_init__(self):
        if self.block_kind not in BLOCK_KINDS:
            raise ValidationError(
                f"block_kind must be one of {BLOCK_KINDS}, got {self.block_kind!r}"
            )
        if self.ssd_impl not in ("chunked", "sequential"):
            raise ValidationError(
                f"ssd_impl must be 'chunked' or 'sequential', got {self.ssd_impl!r}"
            )
        positive = (
            "vocab_size", "d_model", "n_layers", "state_size", "head_dim",
            "n_heads", "expand_factor", "local_conv_width", "max_seq_len",
            "chunk_len",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be positive")
        if self.block_kind == "attention" and self.d_model % self.n_heads != 0:
            raise ValidationError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if self.block_kind == "mamba2" and self.inner_dim % self.head_dim != 0:
            raise ValidationError(
                f"inner width {self.inner_dim} not divisible by head_dim {self.head_dim}"
            )
        if not (0 <= self.eos_id < self.vocab_size):
            raise ValidationError("eos_id out of vocabulary range")
        if not (0 <= self.pad_id < self.vocab_size):
            raise ValidationError("pad_id out of vocabulary range")

    @property
    def inner_dim(self) -> int:
        """Mixer width after the expansion projection."""
        return self.expand_factor * self.d_model

    @property
    def ssd_heads(self) -> int:
        return self.inner_dim // self.head_dim

    def replace(self, **kw) -> "ModelConfig":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(kw)
        return ModelConfig(**current)


def desk_config(block_kind: str, **overrides) -> ModelConfig:
    """Small defaults used by benchmarks and demos; SSD blocks get the larger
    default state width."""
    base = dict(
        vocab_size=259,
        d_model=64,
        n_layers=2,
        block_kind=block_kind,
        state_size=64 if block_kind == "mamba2" else 16,
        head_dim=4,
        n_heads=4,
        max_seq_len=8192,
    )
    base.update(overrides)
    return ModelConfig(**base)
