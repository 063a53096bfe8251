"""Batched inference-only forward pass.

Re-expresses the model in plain numpy with a leading batch axis so one python
loop iteration serves every sequence in the batch; scores match the
per-sequence reference path to float64 round-off. No gradients, no tape.
"""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, InputError
from .config import ModelConfig
from .network import RerankModel


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _silu(x):
    return x * _sigmoid(x)


def _rmsnorm(x, g):
    return x / np.sqrt(np.mean(x * x, axis=-1, keepdims=True) + 1e-6) * g


def _conv(x, w, b):
    # x (B, L, E), w (W, E) depthwise causal taps
    width = w.shape[0]
    length = x.shape[1]
    padded = np.concatenate([np.zeros_like(x[:, : width - 1]), x], axis=1)
    out = np.zeros_like(x)
    for j in range(width):
        out += padded[:, j : j + length] * w[j]
    return out + b


def _mamba1_mixer(x, arr, pre, cfg: ModelConfig):
    e = cfg.inner_dim
    uz = x @ arr[f"{pre}.in_proj.w"] + arr[f"{pre}.in_proj.b"]
    u, z = uz[..., :e], uz[..., e:]
    u = _silu(_conv(u, arr[f"{pre}.conv.w"], arr[f"{pre}.conv.b"]))
    delta = np.logaddexp(0.0, u @ arr[f"{pre}.dt.w"] + arr[f"{pre}.dt.b"])
    b_t = u @ arr[f"{pre}.b_proj.w"]
    c_t = u @ arr[f"{pre}.c_proj.w"]
    a = -np.exp(arr[f"{pre}.a_log"])  # (E, N)
    batch, length, _ = u.shape
    n = a.shape[1]
    h = np.zeros((batch, e, n))
    y = np.empty_like(u)
    for t in range(length):
        a_bar = np.exp(delta[:, t, :, None] * a)
        b_bar = (a_bar - 1.0) / a * b_t[:, t, None, :]
        h = a_bar * h + b_bar * u[:, t, :, None]
        y[:, t] = np.einsum("ben,bn->be", h, c_t[:, t])
    y = y * _silu(z)
    return y @ arr[f"{pre}.out_proj.w"] + arr[f"{pre}.out_proj.b"]


def _mamba2_mixer(x, arr, pre, cfg: ModelConfig):
    e = cfg.inner_dim
    p, n, heads, q_len = cfg.head_dim, cfg.state_size, cfg.ssd_heads, cfg.chunk_len
    uz = x @ arr[f"{pre}.in_proj.w"] + arr[f"{pre}.in_proj.b"]
    u, z = uz[..., :e], uz[..., e:]
    u = _silu(_conv(u, arr[f"{pre}.conv.w"], arr[f"{pre}.conv.b"]))
    delta = np.logaddexp(0.0, u @ arr[f"{pre}.dt.w"] + arr[f"{pre}.dt.b"])  # (B,L,H)
    b_t = u @ arr[f"{pre}.b_proj.w"]
    c_t = u @ arr[f"{pre}.c_proj.w"]
    a = -np.exp(arr[f"{pre}.a_log"])  # (H,)
    batch, length, _ = u.shape
    y = np.empty_like(u)
    for h in range(heads):
        xc_all = u[..., h * p : (h + 1) * p]
        bc_all = b_t[..., h * n : (h + 1) * n]
        cc_all = c_t[..., h * n : (h + 1) * n]
        state = np.zeros((batch, p, n))
        for start in range(0, length, q_len):
            end = min(start + q_len, length)
            size = end - start
            xc = xc_all[:, start:end]
            bc = bc_all[:, start:end]
            cc = cc_all[:, start:end]
            log_decay = delta[:, start:end, h] * a[h]
            cum = np.cumsum(log_decay, axis=1)
            b_bar = ((np.exp(log_decay) - 1.0) / a[h])[..., None] * bc
            diff = cum[:, :, None] - cum[:, None, :]
            tril = np.tril(np.ones((size, size), dtype=bool))
            decay = np.where(tril, np.exp(np.where(tril, diff, 0.0)), 0.0)
            yc = (np.matmul(cc, b_bar.transpose(0, 2, 1)) * decay) @ xc
            yc += np.exp(cum)[..., None] * np.matmul(cc, state.transpose(0, 2, 1))
            y[:, start:end, h * p : (h + 1) * p] = yc
            end_decay = np.exp(cum[:, -1])
            carried = np.matmul(
                xc.transpose(0, 2, 1), np.exp(cum[:, -1:, None] - cum[:, :, None]) * b_bar
            )
            state = end_decay[:, None, None] * state + carried
    y = y * _silu(z)
    return y @ arr[f"{pre}.out_proj.w"] + arr[f"{pre}.out_proj.b"]


def _attention_mixer(x, arr, pre, cfg: ModelConfig):
    d = cfg.d_model
    hd = d // cfg.n_heads
    length = x.shape[1]
    q = x @ arr[f"{pre}.attn.wq"] + arr[f"{pre}.attn.bq"]
    k = x @ arr[f"{pre}.attn.wk"] + arr[f"{pre}.attn.bk"]
    v = x @ arr[f"{pre}.attn.wv"] + arr[f"{pre}.attn.bv"]
    tril = np.tril(np.ones((length, length), dtype=bool))
    merged = np.empty_like(x)
    scale = 1.0 / np.sqrt(hd)
    for h in range(cfg.n_heads):
        cols = slice(h * hd, (h + 1) * hd)
        scores = np.matmul(q[..., cols], k[..., cols].transpose(0, 2, 1)) * scale
        scores = np.where(tril, scores, -np.inf)
        scores -= scores.max(axis=-1, keepdims=True)
        weights = np.exp(scores)
        weights /= weights.sum(axis=-1, keepdims=True)
        merged[..., cols] = np.matmul(weights, v[..., cols])
    return merged @ arr[f"{pre}.attn.wo"] + arr[f"{pre}.attn.bo"]


def batched_hidden(model: RerankModel, ids: np.ndarray) -> np.ndarray:
    """Hidden states for a (B, L) id matrix; rows may be padded."""
    cfg = model.config
    ids = np.asarray(ids, dtype=np.int64)
    if ids.ndim != 2:
        raise ContractError("ids must be a (batch, length) matrix")
    if ids.shape[1] > cfg.max_seq_len:
        raise ContractError(
            f"sequence length {ids.shape[1]} exceeds max_seq_len {cfg.max_seq_len}"
        )
    if np.any((ids < 0) | (ids >= cfg.vocab_size)):
        raise InputError("token id out of vocabulary in batch")
    arr = model.named_arrays()
    x = arr["embed.tok"][ids]
    if cfg.block_kind == "attention":
        x = x + arr["embed.pos"][: ids.shape[1]]
    for i in range(cfg.n_layers):
        pre = f"layer{i}"
        normed = _rmsnorm(x, arr[f"{pre}.norm.g"])
        if cfg.block_kind == "mamba1":
            x = x + _mamba1_mixer(normed, arr, pre, cfg)
        elif cfg.block_kind == "mamba2":
            x = x + _mamba2_mixer(normed, arr, pre, cfg)
        else:
            x = x + _attention_mixer(normed, arr, pre, cfg)
            normed2 = _rmsnorm(x, arr[f"{pre}.norm2.g"])
            hidden = _silu(normed2 @ arr[f"{pre}.ffn.w1"] + arr[f"{pre}.ffn.b1"])
            x = x + hidden @ arr[f"{pre}.ffn.w2"] + arr[f"{pre}.ffn.b2"]
    return _rmsnorm(x, arr["final_norm.g"])


def batched_scores(
    model: RerankModel, ids: np.ndarray, eos_positions: np.ndarray
) -> np.ndarray:
    """Relevance scores (B,) read at each row's end-marker position."""
    ids = np.asarray(ids, dtype=np.int64)
    eos_positions = np.asarray(eos_positions, dtype=np.int64)
    if eos_positions.shape != (ids.shape[0],):
        raise ContractError("eos_positions must have one entry per batch row")
    rows = np.arange(ids.shape[0])
    if np.any(ids[rows, eos_positions] != model.config.eos_id):
        raise ContractError("end-of-sequence id missing at a stated position")
    hidden = batched_hidden(model, ids)
    arr = model.named_arrays()
    picked = hidden[rows, eos_positions]
    return picked @ arr["head.w"] + float(arr["head.b"])


def pad_and_score(model: RerankModel, sequences: list[np.ndarray]) -> np.ndarray:
    """Convenience: pad variable-length sequences and score them as one batch."""
    if not sequences:
        raise ContractError("empty batch")
    pad_to = max(len(s) for s in sequences)
    ids = np.full((len(sequences), pad_to), model.config.pad_id, dtype=np.int64)
    eos = np.empty(len(sequences), dtype=np.int64)
    for i, seq in enumerate(sequences):
        ids[i, : len(seq)] = seq
        eos[i] = len(seq) - 1
    return batched_scores(model, ids, eos)
