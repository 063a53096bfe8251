"""Stacked causal scoring model: embedding, mixer blocks with pre-norm and
residuals, final norm, and a linear relevance head read at the end marker."""

from __future__ import annotations

import numpy as np

from .. import profiling
from ..errors import ContractError, InputError
from .autodiff import Tape, Tensor, matmul, record, rms_norm, take
from .blocks import causal_attention, feed_forward, mamba1_mixer, mamba2_mixer
from .config import ModelConfig


def _inverse_softplus(y: np.ndarray) -> np.ndarray:
    # exact inverse of log(1 + exp(x)); accurate for small y via expm1
    return np.log(np.expm1(y))


def init_params(config: ModelConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    """Fresh trainable parameters in a deterministic name order.

    Projection weights are fan-in-scaled normals (std = 1/sqrt(fan_in)) so
    per-layer gain stays near one at any width; a fixed small std starves the
    narrow desk-scale blocks of signal. Biases are zero, norm gains one.
    SSM decay rates are stored in log space with a_diag[., n] = -(n+1)
    (per-head -(h+1) for the scalar-identity blocks); the step-size bias is
    set so initial deltas are log-uniform in [1e-3, 1e-1].
    """
    d = config.d_model
    e = config.inner_dim
    n = config.state_size
    w = config.local_conv_width
    params: dict[str, np.ndarray] = {}

    def normal(*shape, fan: int | None = None):
        return rng.standard_normal(shape) / np.sqrt(fan if fan is not None else shape[0])

    # embedding rows are normalized away by the first rms-norm; unit-ish rows
    params["embed.tok"] = normal(config.vocab_size, d, fan=d)
    if config.block_kind == "attention":
        params["embed.pos"] = normal(config.max_seq_len, d, fan=d)
    for i in range(config.n_layers):
        pre = f"layer{i}"
        params[f"{pre}.norm.g"] = np.ones(d)
        if config.block_kind == "attention":
            for name in ("wq", "wk", "wv", "wo"):
                params[f"{pre}.attn.{name}"] = normal(d, d)
            for name in ("bq", "bk", "bv", "bo"):
                params[f"{pre}.attn.{name}"] = np.zeros(d)
            params[f"{pre}.norm2.g"] = np.ones(d)
            params[f"{pre}.ffn.w1"] = normal(d, 4 * d)
            params[f"{pre}.ffn.b1"] = np.zeros(4 * d)
            params[f"{pre}.ffn.w2"] = normal(4 * d, d)
            params[f"{pre}.ffn.b2"] = np.zeros(d)
            continue
        params[f"{pre}.in_proj.w"] = normal(d, 2 * e)
        params[f"{pre}.in_proj.b"] = np.zeros(2 * e)
        params[f"{pre}.conv.w"] = normal(w, e)
        params[f"{pre}.conv.b"] = np.zeros(e)
        if config.block_kind == "mamba1":
            params[f"{pre}.dt.w"] = normal(e, e)
            delta0 = np.exp(rng.uniform(np.log(1e-3), np.log(1e-1), size=e))
            params[f"{pre}.dt.b"] = _inverse_softplus(delta0)
            params[f"{pre}.b_proj.w"] = normal(e, n)
            params[f"{pre}.c_proj.w"] = normal(e, n)
            params[f"{pre}.a_log"] = np.tile(
                np.log(np.arange(1, n + 1, dtype=np.float64)), (e, 1)
            )
        else:  # mamba2
            heads = config.ssd_heads
            params[f"{pre}.dt.w"] = normal(e, heads)
            delta0 = np.exp(rng.uniform(np.log(1e-3), np.log(1e-1), size=heads))
            params[f"{pre}.dt.b"] = _inverse_softplus(delta0)
            params[f"{pre}.b_proj.w"] = normal(e, heads * n)
            params[f"{pre}.c_proj.w"] = normal(e, heads * n)
            params[f"{pre}.a_log"] = np.log(np.arange(1, heads + 1, dtype=np.float64))
        params[f"{pre}.out_proj.w"] = normal(e, d)
        params[f"{pre}.out_proj.b"] = np.zeros(d)
    params["final_norm.g"] = np.ones(d)
    params["head.w"] = normal(d)
    params["head.b"] = np.zeros(())
    return {name: Tensor(arr) for name, arr in params.items()}


def count_params_formula(config: ModelConfig) -> int:
    """Closed-form trainable-parameter count; asserted against the stored sum."""
    d, e, n, w = config.d_model, config.inner_dim, config.state_size, config.local_conv_width
    total = config.vocab_size * d  # token embedding
    if config.block_kind == "attention":
        total += config.max_seq_len * d
        per_layer = d + 4 * (d * d + d) + d + (d * 4 * d + 4 * d) + (4 * d * d + d)
    elif config.block_kind == "mamba1":
        per_layer = (
            d + (d * 2 * e + 2 * e) + (w * e + e)
            + (e * e + e) + 2 * (e * n) + e * n + (e * d + d)
        )
    else:
        h = config.ssd_heads
        per_layer = (
            d + (d * 2 * e + 2 * e) + (w * e + e)
            + (e * h + h) + 2 * (e * h * n) + h + (e * d + d)
        )
    total += config.n_layers * per_layer
    total += d  # final norm
    total += d + 1  # score head
    return total


class RerankModel:
    """Causal sequence scorer f(token ids) -> scalar relevance."""

    def __init__(self, config: ModelConfig, seed: int = 0, params: dict | None = None):
        self.config = config
        if params is None:
            params = init_params(config, np.random.default_rng(seed))
        self.params = params

    def parameter_count(self) -> int:
        return sum(int(np.asarray(t.data).size) for t in self.params.values())

    def _validate_ids(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise ContractError("ids must be a non-empty 1-D sequence")
        if ids.size > self.config.max_seq_len:
            raise ContractError(
                f"sequence length {ids.size} exceeds max_seq_len {self.config.max_seq_len}"
            )
        bad = (ids < 0) | (ids >= self.config.vocab_size)
        if np.any(bad):
            pos = int(np.argmax(bad))
            raise InputError(
                f"token id {int(ids[pos])} out of vocabulary at position {pos}"
            )
        return ids

    def forward_tensor(self, ids) -> Tensor:
        """Build the (L, D) hidden representation under the active tape."""
        ids = self._validate_ids(ids)
        cfg = self.config
        p = self.params
        with profiling.scope("embedding"):
            x = take(p["embed.tok"], ids)
            if cfg.block_kind == "attention":
                x = x + p["embed.pos"][: ids.size]
        for i in range(cfg.n_layers):
            pre = f"layer{i}"
            with profiling.scope("normalization"):
                normed = rms_norm(x, p[f"{pre}.norm.g"])
            if cfg.block_kind == "mamba1":
                x = x + mamba1_mixer(normed, p, pre, cfg)
            elif cfg.block_kind == "mamba2":
                x = x + mamba2_mixer(normed, p, pre, cfg)
            else:
                with profiling.scope("attention"):
                    x = x + causal_attention(normed, p, pre, cfg)
                with profiling.scope("normalization"):
                    normed2 = rms_norm(x, p[f"{pre}.norm2.g"])
                with profiling.scope("projection"):
                    x = x + feed_forward(normed2, p, pre)
        with profiling.scope("normalization"):
            return rms_norm(x, p["final_norm.g"])

    def score_tensor(self, ids, eos_pos: int | None = None) -> Tensor:
        """Scalar relevance read at the end marker (default: last position)."""
        ids = np.asarray(ids, dtype=np.int64)
        if eos_pos is None:
            eos_pos = ids.size - 1
        if not (0 <= eos_pos < ids.size) or ids[eos_pos] != self.config.eos_id:
            raise ContractError(
                f"expected end-of-sequence id {self.config.eos_id} at position {eos_pos}"
            )
        hidden = self.forward_tensor(ids)
        with profiling.scope("score_head"):
            return matmul(hidden[eos_pos], self.params["head.w"]) + self.params["head.b"]

    def forward(self, ids, record_tape: bool = True) -> tuple[Tensor, Tape | None]:
        if not record_tape:
            return self.forward_tensor(ids), None
        tape = Tape()
        with record(tape):
            hidden = self.forward_tensor(ids)
        return hidden, tape

    def score(self, ids, eos_pos: int | None = None) -> float:
        """Eager scalar score, no gradient recording."""
        return float(self.score_tensor(ids, eos_pos).data)

    def zero_grads(self) -> None:
        for t in self.params.values():
            t.grad = None

    def named_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self.params.items()}
