"""Forward wall-time scaling curves over sequence length, with fitted
log-log slopes per block kind."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from ..model.config import ModelConfig
from ..model.network import RerankModel


@dataclass
class ScalingReport:
    rows: list[dict] = field(default_factory=list)  # block_kind, length, seconds
    slopes: dict[str, float] = field(default_factory=dict)
    worker_count: int = 1


def fit_loglog_slope(lengths, seconds) -> float:
    xs = np.log(np.asarray(lengths, dtype=np.float64))
    ys = np.log(np.asarray(seconds, dtype=np.float64))
    return float(np.polyfit(xs, ys, 1)[0])


def scaling_config(kind: str, d_model: int, n_layers: int, max_len: int) -> ModelConfig:
    return ModelConfig(
        vocab_size=259,
        d_model=d_model,
        n_layers=n_layers,
        block_kind=kind,
        state_size=64 if kind == "mamba2" else 16,
        head_dim=4,
        n_heads=2,
        max_seq_len=max_len,
        chunk_len=32,
    )


def scaling_curve(
    kinds: list[str],
    lengths: list[int],
    d_model: int = 64,
    n_layers: int = 1,
    seed: int = 0,
    repeats: int = 2,
    clock=None,
) -> ScalingReport:
    """Measured forward seconds per (kind, L) at matched width, best-of-repeats."""
    if list(lengths) != sorted(lengths) or len(lengths) < 2:
        raise ContractError("lengths must be ascending with at least two entries")
    clock = clock if clock is not None else time.perf_counter
    report = ScalingReport()
    rng = np.random.default_rng(seed)
    for kind in kinds:
        config = scaling_config(kind, d_model, n_layers, max(lengths))
        model = RerankModel(config, seed=seed)
        inputs = {
            length: rng.integers(0, 256, size=length).astype(np.int64)
            for length in lengths
        }
        model.forward_tensor(inputs[lengths[0]])  # warm-up
        secs = []
        for length in lengths:
            reps = repeats if length <= 1024 else 1
            best = float("inf")
            for _ in range(reps):
                start = clock()
                model.forward_tensor(inputs[length])
                best = min(best, clock() - start)
            secs.append(best)
            report.rows.append(
                {"block_kind": kind, "length": length, "seconds": best}
            )
        report.slopes[kind] = fit_loglog_slope(lengths, secs)
    return report
