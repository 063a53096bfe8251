"""Analytic per-layer arithmetic-operation counts.

Counts multiply-accumulates as 2 ops with explicit constants for this
implementation's blocks. Training counts are 3x forward (one forward plus a
two-pass backward). The asymptotic shapes these formulas must reproduce:
quadratic-in-L training work for attention versus linear for the SSM blocks,
and per-step inference work that depends on L for attention but not for the
SSM blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model.config import ModelConfig

TRAIN_FACTOR = 3.0  # forward + backward


@dataclass(frozen=True)
class FlopEstimate:
    """Per-layer operation counts for one sequence of length L."""

    block_kind: str
    length: int
    forward_components: dict[str, float]
    infer_step_components: dict[str, float]

    @property
    def forward_total(self) -> float:
        return sum(self.forward_components.values())

    @property
    def train_total(self) -> float:
        return TRAIN_FACTOR * self.forward_total

    @property
    def infer_step_total(self) -> float:
        return sum(self.infer_step_components.values())


def estimate_flops(config: ModelConfig, length: int) -> FlopEstimate:
    d = config.d_model
    e = config.inner_dim
    n = config.state_size
    w = config.local_conv_width
    lf = float(length)
    if config.block_kind == "attention":
        heads = config.n_heads
        fwd = {
            "qkv_proj": 6.0 * lf * d * d,
            "scores": 2.0 * lf * lf * d,
            "softmax": 5.0 * heads * lf * lf,
            "attn_values": 2.0 * lf * lf * d,
            "out_proj": 2.0 * lf * d * d,
            "ffn": 16.0 * lf * d * d,
        }
        step = {
            "qkv_proj": 6.0 * d * d,
            "scores": 2.0 * lf * d,
            "softmax": 5.0 * heads * lf,
            "attn_values": 2.0 * lf * d,
            "out_proj": 2.0 * d * d,
            "ffn": 16.0 * d * d,
        }
    elif config.block_kind == "mamba1":
        fwd = {
            "in_proj": 4.0 * lf * d * e,
            "local_conv": 2.0 * lf * e * w,
            "dt_proj": 2.0 * lf * e * e,
            "bc_proj": 4.0 * lf * e * n,
            "scan": 10.0 * lf * e * n,
            "gate": 4.0 * lf * e,
            "out_proj": 2.0 * lf * e * d,
        }
        step = {
            "in_proj": 4.0 * d * e,
            "local_conv": 2.0 * e * w,
            "dt_proj": 2.0 * e * e,
            "bc_proj": 4.0 * e * n,
            "scan": 10.0 * e * n,
            "gate": 4.0 * e,
            "out_proj": 2.0 * e * d,
        }
    else:  # mamba2
        heads = config.ssd_heads
        p = config.head_dim
        q = float(config.chunk_len)
        fwd = {
            "in_proj": 4.0 * lf * d * e,
            "local_conv": 2.0 * lf * e * w,
            "dt_proj": 2.0 * lf * e * heads,
            "bc_proj": 4.0 * lf * e * heads * n,
            # per chunk and head: (Q,N)x(N,Q), decay mask, (Q,Q)x(Q,P),
            # inter-chunk readout and state carry
            "chunk_matmul": lf * heads * (2.0 * q * n + 3.0 * q + 2.0 * q * p + 4.0 * n * p),
            "gate": 4.0 * lf * e,
            "out_proj": 2.0 * lf * e * d,
        }
        step = {
            "in_proj": 4.0 * d * e,
            "local_conv": 2.0 * e * w,
            "dt_proj": 2.0 * e * heads,
            "bc_proj": 4.0 * e * heads * n,
            "state_update": heads * (5.0 * p * n + 4.0 * n),
            "gate": 4.0 * e,
            "out_proj": 2.0 * e * d,
        }
    return FlopEstimate(
        block_kind=config.block_kind,
        length=length,
        forward_components=fwd,
        infer_step_components=step,
    )
