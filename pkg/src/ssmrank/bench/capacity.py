"""Projected-peak memory guards for benchmark runs.

The estimates below bound the dominant live buffers (attention score
matrices, recorded activations on the SSM paths) and turn would-be
out-of-memory configurations into a structured capacity error naming the
offending configuration instead of exhausting the host.
"""

from __future__ import annotations

from ..errors import CapacityError
from ..model.config import ModelConfig

DEFAULT_MEM_LIMIT_MB = 4096.0

_F8 = 8  # bytes per float64


def estimate_forward_bytes(config: ModelConfig, batch: int, length: int) -> int:
    if config.block_kind == "attention":
        per_head = 4 * length * length * _F8  # scores, mask, softmax, weights
        core = config.n_heads * per_head
    elif config.block_kind == "mamba1":
        core = 8 * length * config.inner_dim * config.state_size * _F8
    else:
        q = config.chunk_len
        heads = config.ssd_heads
        per_chunk = (3 * q * q + 2 * q * config.state_size + q * config.head_dim) * _F8
        core = heads * (length // max(q, 1) + 1) * per_chunk + 8 * length * config.inner_dim * _F8
    activations = 6 * length * config.inner_dim * _F8
    return batch * config.n_layers * (core + activations)


def estimate_training_bytes(config: ModelConfig, batch: int, length: int) -> int:
    # forward buffers are retained by the tape and mirrored by gradients
    return 3 * estimate_forward_bytes(config, batch, length)


def check_capacity(
    bytes_needed: int,
    mem_limit_mb: float,
    config: ModelConfig,
    batch: int,
    length: int,
    what: str,
) -> None:
    limit = mem_limit_mb * 1024 * 1024
    if bytes_needed > limit:
        raise CapacityError(
            f"{what} projected to need {bytes_needed / 1e6:.0f} MB "
            f"(limit {mem_limit_mb:.0f} MB) for block_kind={config.block_kind} "
            f"d_model={config.d_model} n_layers={config.n_layers} "
            f"batch={batch} length={length}"
        )
