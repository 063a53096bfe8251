"""Input-dependent (time-varying) state-space layers.

Two layer families:

* Selective scan: per-timestep (delta_t, B_t, C_t) are projections of the
  input; the state matrix diagonal stays a learned constant. Evaluated by a
  plain sequential recurrence in O(L * D * N) time and O(D * N) state.

* Scalar-identity multi-head layer: the state matrix is a scalar times
  identity per head, with head dimension P and D = P * heads. Besides the
  sequential reference recurrence, a chunked evaluation computes each
  length-Q chunk with dense decay-masked matrix products and carries one
  P x N state per head across chunks. The chunked path must match the
  sequential path to near machine precision in float64.

Per-step ZOH discretization reuses :func:`ssmrank.ssm.lti.discretize_zoh`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, NumericError, ValidationError
from .lti import discretize_zoh


@dataclass
class ScanStats:
    """Instrumentation counters for scan paths.

    ``ops`` counts elementwise arithmetic operations (not timed); the state
    counters track how many float64 values the scan keeps alive per sequence,
    which must not grow with L.
    """

    ops: int = 0
    peak_state_floats: int = 0
    _live_state_floats: int = 0

    def add_ops(self, n: int) -> None:
        self.ops += n

    def note_alloc(self, n_floats: int) -> None:
        self._live_state_floats += n_floats
        if self._live_state_floats > self.peak_state_floats:
            self.peak_state_floats = self._live_state_floats

    def note_free(self, n_floats: int) -> None:
        self._live_state_floats -= n_floats


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + exp(x)), computed without overflow."""
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class SelectiveProjections:
    """Input-to-parameter maps for a selective layer of width D, state N.

    delta_t = softplus(x_t @ w_delta + b_delta)   -- (D,) per step, positive
    B_t     = x_t @ w_b                           -- (N,), shared by channels
    C_t     = x_t @ w_c                           -- (N,), shared by channels
    """

    w_delta: np.ndarray
    b_delta: np.ndarray
    w_b: np.ndarray
    w_c: np.ndarray

    def __post_init__(self):
        d = self.w_delta.shape[0]
        if self.w_delta.shape != (d, d):
            raise ValidationError(f"w_delta must be square (D, D), got {self.w_delta.shape}")
        if self.b_delta.shape != (d,):
            raise ValidationError(f"b_delta must have shape ({d},), got {self.b_delta.shape}")
        if self.w_b.ndim != 2 or self.w_b.shape[0] != d:
            raise ValidationError(f"w_b must have shape ({d}, N), got {self.w_b.shape}")
        if self.w_c.shape != self.w_b.shape:
            raise ValidationError(f"w_c shape {self.w_c.shape} differs from w_b {self.w_b.shape}")


@dataclass(frozen=True)
class SelectiveTrace:
    """Per-timestep parameter streams: delta (L, D) > 0, b and c (L, N)."""

    delta: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if self.delta.ndim != 2 or self.b.ndim != 2 or self.c.ndim != 2:
            raise ValidationError("trace arrays must be 2-dimensional")
        if not (self.delta.shape[0] == self.b.shape[0] == self.c.shape[0]):
            raise ValidationError("trace arrays disagree on sequence length")
        if self.b.shape != self.c.shape:
            raise ValidationError(f"b shape {self.b.shape} differs from c {self.c.shape}")
        if not np.all(self.delta > 0):
            raise ValidationError("delta entries must be strictly positive")

    @property
    def length(self) -> int:
        return self.delta.shape[0]


@dataclass(frozen=True)
class SsdHeadParams:
    """Scalar-identity heads: H heads of width P over channels D = P * H.

    ``a_scalar`` holds one strictly negative decay rate per head, shared by
    that head's P channels and N state dimensions.
    """

    num_heads: int
    head_dim: int
    state_size: int
    a_scalar: np.ndarray

    def __post_init__(self):
        if self.num_heads < 1 or self.head_dim < 1 or self.state_size < 1:
            raise ValidationError("head counts and sizes must be positive")
        if self.a_scalar.shape != (self.num_heads,):
            raise ValidationError(
                f"a_scalar must have shape ({self.num_heads},), got {self.a_scalar.shape}"
            )
        if not np.all(self.a_scalar < 0):
            raise ValidationError("a_scalar entries must be strictly negative")

    @property
    def channels(self) -> int:
        return self.num_heads * self.head_dim


@dataclass(frozen=True)
class SsdTrace:
    """Per-timestep per-head streams: delta (L, H) > 0, b and c (L, H, N).

    Each head carries its own (delta, B, C); delta is a per-head scalar
    shared across the head's channels, consistent with the scalar-identity
    state matrix.
    """

    delta: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        if self.delta.ndim != 2 or self.b.ndim != 3 or self.c.ndim != 3:
            raise ValidationError("ssd trace must have delta (L,H), b/c (L,H,N)")
        if self.b.shape != self.c.shape:
            raise ValidationError(f"b shape {self.b.shape} differs from c {self.c.shape}")
        if self.b.shape[:2] != self.delta.shape:
            raise ValidationError("b/c leading dims must match delta (L, H)")
        if not np.all(self.delta > 0):
            raise ValidationError("delta entries must be strictly positive")

    @property
    def length(self) -> int:
        return self.delta.shape[0]

    @property
    def num_heads(self) -> int:
        return self.delta.shape[1]


@dataclass(frozen=True)
class ChunkPlan:
    """Chunk boundaries covering [0, L): contiguous, in order, non-empty."""

    chunk_len: int
    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.chunk_len < 1:
            raise ContractError(f"chunk_len must be >= 1, got {self.chunk_len}")
        prev = 0
        for start, end in self.bounds:
            if start != prev or end <= start:
                raise ValidationError("chunk bounds must be contiguous and non-empty")
            prev = end

    @property
    def num_chunks(self) -> int:
        return len(self.bounds)

    @property
    def total_len(self) -> int:
        return self.bounds[-1][1] if self.bounds else 0


def plan_chunks(length: int, chunk_len: int) -> ChunkPlan:
    """Split [0, length) into ceil(length / chunk_len) contiguous chunks."""
    if chunk_len < 1:
        raise ContractError(f"chunk_len must be >= 1, got {chunk_len}")
    bounds = tuple(
        (s, min(s + chunk_len, length)) for s in range(0, length, chunk_len)
    )
    return ChunkPlan(chunk_len=chunk_len, bounds=bounds)


def project_selective(x: np.ndarray, proj: SelectiveProjections) -> SelectiveTrace:
    """Compute (delta_t, B_t, C_t) streams from an (L, D) input."""
    x = np.asarray(x, dtype=np.float64)
    d = proj.w_delta.shape[0]
    if x.ndim != 2 or x.shape[1] != d:
        raise ContractError(f"x must have shape (L, {d}), got {x.shape}")
    pre = x @ proj.w_delta + proj.b_delta
    delta = softplus(pre)
    b = x @ proj.w_b
    c = x @ proj.w_c
    for name, arr in (("delta", delta), ("b", b), ("c", c)):
        bad = ~np.all(np.isfinite(arr), axis=tuple(range(1, arr.ndim)))
        if np.any(bad):
            t = int(np.argmax(bad))
            raise NumericError(f"non-finite {name} activation at timestep {t}")
    return SelectiveTrace(delta=delta, b=b, c=c)


def selective_scan_sequential(
    x: np.ndarray,
    trace: SelectiveTrace,
    a_diag: np.ndarray,
    stats: ScanStats | None = None,
) -> np.ndarray:
    """Reference recurrence for the selective layer.

    Per timestep: ZOH-discretize (delta_t, a_diag, B_t), update the (D, N)
    state, read out with C_t. O(L * D * N) work, O(D * N) state.
    """
    x = np.asarray(x, dtype=np.float64)
    length, d = x.shape
    if trace.length != length:
        raise ContractError(f"trace length {trace.length} != sequence length {length}")
    if a_diag.ndim != 2 or a_diag.shape[0] != d:
        raise ContractError(f"a_diag must have shape ({d}, N), got {a_diag.shape}")
    if trace.b.shape[1] != a_diag.shape[1]:
        raise ContractError("trace state width disagrees with a_diag")
    n = a_diag.shape[1]
    h = np.zeros((d, n), dtype=np.float64)
    out = np.empty_like(x)
    if stats is not None:
        # state plus the four (D, N) per-step temporaries kept alive at once
        stats.note_alloc(d * n * 5)
    for t in range(length):
        a_bar, b_bar = discretize_zoh(trace.delta[t][:, None], a_diag, trace.b[t][None, :])
        h = a_bar * h + b_bar * x[t][:, None]
        out[t] = h @ trace.c[t]
        if stats is not None:
            # da, exp, b_bar (3), decay-update (3), readout (2) elementwise ops
            stats.add_ops(10 * d * n)
    if stats is not None:
        stats.note_free(d * n * 5)
    return out


def _check_ssd_args(
    x: np.ndarray, heads: SsdHeadParams, trace: SsdTrace
) -> tuple[int, int, int, int]:
    if x.ndim != 2 or x.shape[1] != heads.channels:
        raise ContractError(
            f"x must have shape (L, {heads.channels}), got {x.shape}"
        )
    length = x.shape[0]
    if trace.length != length:
        raise ContractError(f"trace length {trace.length} != sequence length {length}")
    if trace.num_heads != heads.num_heads:
        raise ContractError(
            f"trace has {trace.num_heads} heads, parameters have {heads.num_heads}"
        )
    if trace.b.shape[2] != heads.state_size:
        raise ContractError("trace state width disagrees with head parameters")
    return length, heads.num_heads, heads.head_dim, heads.state_size


def ssd_forward_sequential(
    x: np.ndarray,
    heads: SsdHeadParams,
    trace: SsdTrace,
    stats: ScanStats | None = None,
) -> np.ndarray:
    """Sequential reference for the scalar-identity multi-head layer.

    Per head h and step t: the scalar decay exp(delta[t,h] * a[h]) is shared
    across the head's P channels and N state dims; the (P, N) state absorbs
    the outer product of the head's input slice with the discretized B.
    """
    x = np.asarray(x, dtype=np.float64)
    length, num_heads, p, n = _check_ssd_args(x, heads, trace)
    out = np.empty_like(x)
    if stats is not None:
        stats.note_alloc(num_heads * p * n * 3)
    for head in range(num_heads):
        cols = slice(head * p, (head + 1) * p)
        a = heads.a_scalar[head]
        state = np.zeros((p, n), dtype=np.float64)
        for t in range(length):
            a_bar, b_bar = discretize_zoh(trace.delta[t, head], a, trace.b[t, head])
            state = a_bar * state + np.outer(x[t, cols], b_bar)
            out[t, cols] = state @ trace.c[t, head]
            if stats is not None:
                stats.add_ops(5 * p * n + 4 * n)
    if stats is not None:
        stats.note_free(num_heads * p * n * 3)
    return out


def ssd_forward_chunked(
    x: np.ndarray,
    heads: SsdHeadParams,
    trace: SsdTrace,
    plan: ChunkPlan,
    stats: ScanStats | None = None,
) -> np.ndarray:
    """Chunked evaluation of the scalar-identity layer via dense matmuls.

    Within a chunk the output splits into an intra-chunk term computed with a
    decay-masked (Q, Q) matrix product and an inter-chunk term that decays the
    carried (P, N) state into the chunk; the algebra is identical to the
    sequential recurrence, only the association order differs.
    """
    x = np.asarray(x, dtype=np.float64)
    length, num_heads, p, n = _check_ssd_args(x, heads, trace)
    if plan.total_len != length:
        raise ContractError(
            f"chunk plan covers {plan.total_len} steps, sequence has {length}"
        )
    out = np.empty_like(x)
    for head in range(num_heads):
        cols = slice(head * p, (head + 1) * p)
        a = heads.a_scalar[head]
        state = np.zeros((p, n), dtype=np.float64)
        for start, end in plan.bounds:
            xc = x[start:end, cols]          # (Q, P)
            delta_c = trace.delta[start:end, head]
            bc = trace.b[start:end, head]    # (Q, N)
            cc = trace.c[start:end, head]    # (Q, N)
            a_bar, b_bar = discretize_zoh(delta_c[:, None], a, bc)
            log_decay = delta_c * a          # log a_bar per step, < 0
            cum = np.cumsum(log_decay)       # cum[i] = sum_{tau <= i}
            # intra-chunk: M[i, j] = (C_i . b_bar_j) * exp(cum_i - cum_j), j <= i
            diff = cum[:, None] - cum[None, :]
            mask = np.tril(np.ones((end - start, end - start), dtype=bool))
            decay = np.where(mask, np.exp(np.where(mask, diff, 0.0)), 0.0)
            yc = ((cc @ b_bar.T) * decay) @ xc
            # inter-chunk: carried state decayed to each position
            yc += np.exp(cum)[:, None] * (cc @ state.T)
            out[start:end, cols] = yc
            # carry: decay old state to chunk end, absorb the chunk's inputs
            state = np.exp(cum[-1]) * state + xc.T @ (np.exp(cum[-1] - cum)[:, None] * b_bar)
            if stats is not None:
                q = end - start
                stats.add_ops(2 * q * q * n + 2 * q * q * p + 4 * q * n * p + 3 * q * q)
    return out
