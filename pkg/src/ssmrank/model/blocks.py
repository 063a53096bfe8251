"""Mixer blocks over autodiff tensors: selective-scan, scalar-identity
multi-head (chunked), and causal multi-head attention with a feed-forward
sublayer.

Every mixer maps (L, D) to (L, D); pre-normalization and residuals are
applied by the caller. The SSM math here mirrors ``ssmrank.ssm`` step for
step, re-expressed in recorded tensor ops so the backward pass is exact.
"""

from __future__ import annotations

import numpy as np

from .. import profiling
from .autodiff import (
    Tensor,
    concat,
    cumsum,
    exp,
    masked_fill,
    matmul,
    reshape,
    sigmoid,
    silu,
    softmax_lastdim,
    softplus,
    take,
    tensor_sum,
    transpose,
)
from .config import ModelConfig


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    out = matmul(x, w)
    return out if b is None else out + b


def depthwise_causal_conv(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Per-channel causal convolution; w is (width, E), x is (L, E)."""
    width = w.shape[0]
    length = x.shape[0]
    zeros = Tensor(np.zeros((width - 1, x.shape[1])))
    padded = concat([zeros, x], axis=0)
    out = None
    for j in range(width):
        # tap j reads inputs j-(width-1) steps back
        term = padded[j : j + length] * take(w, j)
        out = term if out is None else out + term
    return out + b


def selective_scan_tensor(
    u: Tensor, delta: Tensor, b_t: Tensor, c_t: Tensor, a_diag: Tensor
) -> Tensor:
    """Recorded per-step recurrence: u (L, E), delta (L, E), b_t/c_t (L, N),
    a_diag (E, N) strictly negative."""
    length, width = u.shape
    n = a_diag.shape[1]
    h = Tensor(np.zeros((width, n)))
    rows = []
    for t in range(length):
        da = reshape(delta[t], (width, 1)) * a_diag
        a_bar = exp(da)
        b_bar = ((a_bar - 1.0) / a_diag) * reshape(b_t[t], (1, n))
        h = a_bar * h + b_bar * reshape(u[t], (width, 1))
        rows.append(reshape(matmul(h, c_t[t]), (1, width)))
    return concat(rows, axis=0)


def ssd_chunked_tensor(
    u: Tensor,
    delta: Tensor,
    b_t: Tensor,
    c_t: Tensor,
    a_scalar: Tensor,
    config: ModelConfig,
) -> Tensor:
    """Recorded chunked scalar-identity recurrence.

    u (L, E) with E = H*P; delta (L, H); b_t/c_t (L, H*N); a_scalar (H,) < 0.
    Chunk boundaries follow ``config.chunk_len``; the algebra matches
    ``ssmrank.ssm.ssd_forward_chunked``.
    """
    length = u.shape[0]
    p = config.head_dim
    n = config.state_size
    heads = config.ssd_heads
    q_len = config.chunk_len
    bounds = [(s, min(s + q_len, length)) for s in range(0, length, q_len)]
    head_outputs = []
    for h in range(heads):
        a_h = take(a_scalar, h)
        x_h = u[:, h * p : (h + 1) * p]
        b_h = b_t[:, h * n : (h + 1) * n]
        c_h = c_t[:, h * n : (h + 1) * n]
        d_h = delta[:, h]
        state = Tensor(np.zeros((p, n)))
        chunks = []
        for start, end in bounds:
            size = end - start
            xc = x_h[start:end]
            bc = b_h[start:end]
            cc = c_h[start:end]
            log_decay = d_h[start:end] * a_h              # (Q,), negative
            cum = cumsum(log_decay)
            b_bar = reshape((exp(log_decay) - 1.0) / a_h, (size, 1)) * bc
            diff = reshape(cum, (size, 1)) - reshape(cum, (1, size))
            tril = np.tril(np.ones((size, size), dtype=bool))
            decay = exp(masked_fill(diff, tril, -np.inf))
            with profiling.scope("chunk_matmul"):
                yc = matmul((matmul(cc, transpose(b_bar)) * decay), xc)
                yc = yc + reshape(exp(cum), (size, 1)) * matmul(cc, transpose(state))
                end_decay = exp(take(cum, size - 1))
                carried = matmul(
                    transpose(xc),
                    reshape(exp(take(cum, size - 1) - cum), (size, 1)) * b_bar,
                )
                state = end_decay * state + carried
            chunks.append(yc)
        head_outputs.append(concat(chunks, axis=0))
    return concat(head_outputs, axis=1)


def mamba1_mixer(x: Tensor, p: dict, pre: str, config: ModelConfig) -> Tensor:
    e = config.inner_dim
    with profiling.scope("projection"):
        uz = linear(x, p[f"{pre}.in_proj.w"], p[f"{pre}.in_proj.b"])
        u, z = uz[:, :e], uz[:, e:]
    with profiling.scope("local_conv"):
        u = silu(depthwise_causal_conv(u, p[f"{pre}.conv.w"], p[f"{pre}.conv.b"]))
    with profiling.scope("projection"):
        delta = softplus(linear(u, p[f"{pre}.dt.w"], p[f"{pre}.dt.b"]))
        b_t = matmul(u, p[f"{pre}.b_proj.w"])
        c_t = matmul(u, p[f"{pre}.c_proj.w"])
    a_diag = -exp(p[f"{pre}.a_log"])
    with profiling.scope("scan"):
        y = selective_scan_tensor(u, delta, b_t, c_t, a_diag)
    y = y * silu(z)
    with profiling.scope("projection"):
        return linear(y, p[f"{pre}.out_proj.w"], p[f"{pre}.out_proj.b"])


def ssd_sequential_tensor(
    u: Tensor,
    delta: Tensor,
    b_t: Tensor,
    c_t: Tensor,
    a_scalar: Tensor,
    config: ModelConfig,
) -> Tensor:
    """Recorded per-step scalar-identity recurrence, vectorized across heads.

    Shapes as in :func:`ssd_chunked_tensor`; state is (H, P, N).
    """
    length = u.shape[0]
    p = config.head_dim
    n = config.state_size
    heads = config.ssd_heads
    state = Tensor(np.zeros((heads, p, n)))
    a = reshape(a_scalar, (heads, 1, 1))
    rows = []
    for t in range(length):
        log_decay = reshape(delta[t], (heads, 1, 1)) * a
        a_bar = exp(log_decay)
        b_bar = ((a_bar - 1.0) / a) * reshape(b_t[t], (heads, 1, n))
        state = a_bar * state + reshape(u[t], (heads, p, 1)) * b_bar
        y_t = tensor_sum(state * reshape(c_t[t], (heads, 1, n)), axis=2)
        rows.append(reshape(y_t, (1, heads * p)))
    return concat(rows, axis=0)


def mamba2_mixer(x: Tensor, p: dict, pre: str, config: ModelConfig) -> Tensor:
    e = config.inner_dim
    with profiling.scope("projection"):
        uz = linear(x, p[f"{pre}.in_proj.w"], p[f"{pre}.in_proj.b"])
        u, z = uz[:, :e], uz[:, e:]
    with profiling.scope("local_conv"):
        u = silu(depthwise_causal_conv(u, p[f"{pre}.conv.w"], p[f"{pre}.conv.b"]))
    with profiling.scope("projection"):
        delta = softplus(linear(u, p[f"{pre}.dt.w"], p[f"{pre}.dt.b"]))
        b_t = matmul(u, p[f"{pre}.b_proj.w"])
        c_t = matmul(u, p[f"{pre}.c_proj.w"])
    a_scalar = -exp(p[f"{pre}.a_log"])
    if config.ssd_impl == "sequential":
        with profiling.scope("scan"):
            y = ssd_sequential_tensor(u, delta, b_t, c_t, a_scalar, config)
    else:
        y = ssd_chunked_tensor(u, delta, b_t, c_t, a_scalar, config)
    y = y * silu(z)
    with profiling.scope("projection"):
        return linear(y, p[f"{pre}.out_proj.w"], p[f"{pre}.out_proj.b"])


def causal_attention(x: Tensor, p: dict, pre: str, config: ModelConfig) -> Tensor:
    """Multi-head causal softmax attention; mixer only (no residual)."""
    length = x.shape[0]
    d = config.d_model
    hd = d // config.n_heads
    q = linear(x, p[f"{pre}.attn.wq"], p[f"{pre}.attn.bq"])
    k = linear(x, p[f"{pre}.attn.wk"], p[f"{pre}.attn.bk"])
    v = linear(x, p[f"{pre}.attn.wv"], p[f"{pre}.attn.bv"])
    tril = np.tril(np.ones((length, length), dtype=bool))
    heads = []
    scale = 1.0 / np.sqrt(hd)
    for h in range(config.n_heads):
        cols = slice(h * hd, (h + 1) * hd)
        scores = matmul(q[:, cols], transpose(k[:, cols])) * scale
        attn = softmax_lastdim(masked_fill(scores, tril, -np.inf))
        heads.append(matmul(attn, v[:, cols]))
    merged = concat(heads, axis=1)
    return linear(merged, p[f"{pre}.attn.wo"], p[f"{pre}.attn.bo"])


def feed_forward(x: Tensor, p: dict, pre: str) -> Tensor:
    hidden = silu(linear(x, p[f"{pre}.ffn.w1"], p[f"{pre}.ffn.b1"]))
    return linear(hidden, p[f"{pre}.ffn.w2"], p[f"{pre}.ffn.b2"])


__all__ = [
    "causal_attention",
    "depthwise_causal_conv",
    "feed_forward",
    "linear",
    "mamba1_mixer",
    "mamba2_mixer",
    "selective_scan_tensor",
    "ssd_chunked_tensor",
    "sigmoid",
]
