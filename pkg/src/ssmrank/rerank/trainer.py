"""Contrastive training loop: AdamW with linear warmup then linear decay.

The reference path is single-threaded and fully deterministic under the
configured seed: instance order, padding, score readout positions, and the
optimizer state depend only on (dataset, config, model init).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, NumericError, ValidationError
from ..model.autodiff import Tape, record
from ..model.network import RerankModel
from .loss import softmax_loss_tensor
from .template import TruncationPolicy, format_input
from .tokenizer import ByteTokenizer


@dataclass(frozen=True)
class TrainingInstance:
    """One (query, positive, sampled negatives) training unit."""

    query_id: str
    query: str
    positive_id: str
    positive: str
    negative_ids: tuple[str, ...]
    negatives: tuple[str, ...]

    def __post_init__(self):
        if len(self.negatives) < 1:
            raise ValidationError(f"query {self.query_id}: needs at least one negative")
        if len(self.negatives) != len(self.negative_ids):
            raise ValidationError(f"query {self.query_id}: negative ids/texts disagree")
        if self.positive_id in self.negative_ids:
            raise ValidationError(
                f"query {self.query_id}: positive {self.positive_id} also listed as negative"
            )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    warmup_fraction: float = 0.10
    epochs: int = 2
    batch_size: int = 8
    num_negatives: int = 7
    seed: int = 0
    weight_decay: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    max_steps: int = 0  # 0 = no cap

    def __post_init__(self):
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValidationError("warmup_fraction must be in [0, 1)")
        if self.batch_size < 1 or self.epochs < 1 or self.num_negatives < 1:
            raise ValidationError("epochs, batch_size, num_negatives must be positive")


def lr_at_step(step: int, total_steps: int, warmup_fraction: float, peak_lr: float) -> float:
    """Linear 0 -> peak over floor(warmup_fraction * total) steps, then linear
    decay reaching exactly 0 at ``total_steps``."""
    if not 0 <= step <= total_steps:
        raise ContractError(f"step {step} outside [0, {total_steps}]")
    warmup = math.floor(warmup_fraction * total_steps)
    if step <= warmup:
        return peak_lr * (step / warmup) if warmup > 0 else peak_lr
    return peak_lr * (total_steps - step) / (total_steps - warmup)


class AdamW:
    """Decoupled-weight-decay Adam over the model's named parameters."""

    def __init__(self, model: RerankModel, config: TrainConfig):
        self.model = model
        self.config = config
        self.step_count = 0
        self._m = {k: np.zeros_like(t.data) for k, t in model.params.items()}
        self._v = {k: np.zeros_like(t.data) for k, t in model.params.items()}

    def step(self, lr: float) -> None:
        cfg = self.config
        self.step_count += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        bias1 = 1.0 - b1 ** self.step_count
        bias2 = 1.0 - b2 ** self.step_count
        for name in self.model.params:
            param = self.model.params[name]
            grad = param.grad
            if grad is None:
                grad = np.zeros_like(param.data)
            m = self._m[name]
            v = self._v[name]
            m *= b1
            m += (1.0 - b1) * grad
            v *= b2
            v += (1.0 - b2) * grad * grad
            update = (m / bias1) / (np.sqrt(v / bias2) + cfg.adam_eps)
            param.data = param.data - lr * (update + cfg.weight_decay * param.data)


@dataclass
class TrainResult:
    loss_curve: list[float] = field(default_factory=list)
    steps: int = 0

    @property
    def final_loss(self) -> float:
        return self.loss_curve[-1] if self.loss_curve else float("nan")


def _encode_instances(
    dataset: list[TrainingInstance],
    policy: TruncationPolicy,
    tokenizer: ByteTokenizer,
) -> list[list[list[int]]]:
    """Per instance: token ids for [positive, neg_1, ..., neg_m]."""
    encoded = []
    for inst in dataset:
        seqs = [format_input(inst.query, inst.positive, policy, tokenizer)]
        seqs.extend(
            format_input(inst.query, neg, policy, tokenizer) for neg in inst.negatives
        )
        encoded.append(seqs)
    return encoded


def train(
    dataset: list[TrainingInstance],
    config: TrainConfig,
    model: RerankModel,
    policy: TruncationPolicy | None = None,
    tokenizer: ByteTokenizer | None = None,
) -> TrainResult:
    """Optimize the model in place; returns the per-step loss curve.

    Each step draws ``batch_size`` instances (dataset reshuffled per epoch),
    pads every passage in the batch to the batch max length with the pad id,
    reads each passage's score at its own end-marker position, and averages
    the per-instance losses.
    """
    if not dataset:
        raise ContractError("training dataset is empty")
    policy = policy or TruncationPolicy.first_p()
    tokenizer = tokenizer or ByteTokenizer()
    encoded = _encode_instances(dataset, policy, tokenizer)

    steps_per_epoch = math.ceil(len(dataset) / config.batch_size)
    total_steps = steps_per_epoch * config.epochs
    if config.max_steps > 0:
        total_steps = min(total_steps, config.max_steps)

    optimizer = AdamW(model, config)
    rng = np.random.default_rng(config.seed)
    result = TrainResult()
    step = 0
    order: list[int] = []
    while step < total_steps:
        if not order:
            order = list(rng.permutation(len(dataset)))
        batch_idx = [order.pop() for _ in range(min(config.batch_size, len(order)))]
        step += 1
        lr = lr_at_step(step, total_steps, config.warmup_fraction, config.learning_rate)

        batch_seqs = [seq for i in batch_idx for seq in encoded[i]]
        pad_to = max(len(s) for s in batch_seqs)

        tape = Tape()
        model.zero_grads()
        try:
            with record(tape):
                losses = []
                for i in batch_idx:
                    scores = []
                    for seq in encoded[i]:
                        eos_pos = len(seq) - 1
                        padded = np.full(pad_to, model.config.pad_id, dtype=np.int64)
                        padded[: len(seq)] = seq
                        scores.append(model.score_tensor(padded, eos_pos=eos_pos))
                    losses.append(softmax_loss_tensor(scores[0], scores[1:]))
                total = losses[0]
                for extra in losses[1:]:
                    total = total + extra
                batch_loss = total * (1.0 / len(losses))
        except NumericError as exc:
            raise NumericError(f"training diverged at step {step}: {exc}") from exc
        loss_value = float(batch_loss.data)
        if not math.isfinite(loss_value):
            raise NumericError(f"training diverged at step {step}: non-finite loss")
        tape.backward(batch_loss)
        optimizer.step(lr)
        result.loss_curve.append(loss_value)
    result.steps = step
    return result
