"""Training throughput (tokens/second) and inference speed (queries/second)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, InputError
from ..model.autodiff import Tape, record, tensor_sum
from ..model.batched import pad_and_score
from ..model.config import ModelConfig
from ..model.network import RerankModel
from ..rerank.template import TruncationPolicy, format_input
from ..rerank.tokenizer import ByteTokenizer
from ..rerank.trainer import AdamW, TrainConfig
from .capacity import (
    DEFAULT_MEM_LIMIT_MB,
    check_capacity,
    estimate_forward_bytes,
    estimate_training_bytes,
)


@dataclass
class ThroughputReport:
    config_echo: dict
    tokens_per_second: float
    per_step_tps: list[float] = field(default_factory=list)
    tps_std: float = 0.0
    worker_count: int = 1


@dataclass
class QpsReport:
    config_echo: dict
    queries_per_second: float
    num_queries: int
    elapsed_seconds: float
    worker_count: int = 1


def _synthetic_batch(config: ModelConfig, batch: int, seq_len: int, rng) -> list[np.ndarray]:
    seqs = []
    for _ in range(batch):
        ids = rng.integers(0, 256, size=seq_len).astype(np.int64)
        ids[-1] = config.eos_id
        seqs.append(ids)
    return seqs


def measure_training_throughput(
    config: ModelConfig,
    batch_size: int,
    seq_len: int,
    steps: int,
    seed: int = 0,
    clock=None,
    mem_limit_mb: float = DEFAULT_MEM_LIMIT_MB,
) -> ThroughputReport:
    """tokens/second over ``steps - 1`` measured steps (first step discarded
    as warm-up); one step = forward + backward + optimizer update on a
    synthetic (batch, seq_len) token block."""
    if steps < 3:
        raise ContractError(f"need at least 3 steps (1 warm-up), got {steps}")
    clock = clock if clock is not None else time.perf_counter
    check_capacity(
        estimate_training_bytes(config, batch_size, seq_len),
        mem_limit_mb, config, batch_size, seq_len, "training step",
    )
    model = RerankModel(config, seed=seed)
    optimizer = AdamW(model, TrainConfig(learning_rate=1e-4, seed=seed))
    rng = np.random.default_rng(seed)
    batch = _synthetic_batch(config, batch_size, seq_len, rng)

    durations = []
    for step in range(steps):
        start = clock()
        tape = Tape()
        model.zero_grads()
        with record(tape):
            scores = [model.score_tensor(ids) for ids in batch]
            loss = tensor_sum(scores[0] * scores[0])
            for s in scores[1:]:
                loss = loss + tensor_sum(s * s)
            loss = loss * (1.0 / len(scores))
        tape.backward(loss)
        optimizer.step(1e-4)
        durations.append(clock() - start)
    counted = durations[1:]
    tokens = batch_size * seq_len
    per_step = [tokens / d for d in counted]
    total_tps = tokens * len(counted) / sum(counted)
    std = float(np.std(per_step)) if len(per_step) > 1 else 0.0
    echo = {
        "block_kind": config.block_kind,
        "d_model": config.d_model,
        "n_layers": config.n_layers,
        "batch_size": batch_size,
        "seq_len": seq_len,
        "measured_steps": len(counted),
    }
    return ThroughputReport(
        config_echo=echo,
        tokens_per_second=total_tps,
        per_step_tps=per_step,
        tps_std=std,
    )


def measure_inference_qps(
    model: RerankModel,
    eval_set: list[tuple[str, list[str]]],
    batch_size: int,
    max_len: int,
    clock=None,
    mem_limit_mb: float = DEFAULT_MEM_LIMIT_MB,
) -> QpsReport:
    """queries/second: one forward per (query, candidate) pair, candidates
    scored in padded batches of ``batch_size``."""
    if not eval_set:
        raise InputError("empty evaluation set")
    if batch_size < 1:
        raise ContractError("batch_size must be >= 1")
    clock = clock if clock is not None else time.perf_counter
    check_capacity(
        estimate_forward_bytes(model.config, batch_size, max_len),
        mem_limit_mb, model.config, batch_size, max_len, "inference batch",
    )
    tokenizer = ByteTokenizer()
    policy = TruncationPolicy.custom(max_len)
    encoded: list[list[np.ndarray]] = []
    for query, docs in eval_set:
        if not docs:
            raise InputError(f"query {query!r} has no candidates")
        encoded.append(
            [np.asarray(format_input(query, d, policy, tokenizer)) for d in docs]
        )
    start = clock()
    for seqs in encoded:
        for lo in range(0, len(seqs), batch_size):
            pad_and_score(model, seqs[lo : lo + batch_size])
    elapsed = clock() - start
    if elapsed <= 0:
        elapsed = math.ulp(0.0)
    echo = {
        "block_kind": model.config.block_kind,
        "d_model": model.config.d_model,
        "batch_size": batch_size,
        "max_len": max_len,
        "num_queries": len(eval_set),
    }
    return QpsReport(
        config_echo=echo,
        queries_per_second=len(eval_set) / elapsed,
        num_queries=len(eval_set),
        elapsed_seconds=elapsed,
    )
