"""Minimal tape-based reverse-mode differentiation over float64 numpy arrays.

A ``Tape`` records every tensor produced while it is active (via ``record``).
``Tape.backward`` walks the recorded nodes in reverse, calling each node's
vector-Jacobian closure to accumulate gradients into its parents. Leaves
(parameters, inputs) are plain tensors created outside any op.

Each recorded node also keeps a recompute closure, so ``Tape.replay``
re-executes the forward computation from the leaves; with deterministic
numpy ops the replayed values are bit-identical, which makes the tape double
as a verifiable forward trace.

With no tape active the same ops run as plain eager numpy with a thin
wrapper, which is the inference/benchmark fast path.
"""

from __future__ import annotations

import numpy as np

_TAPE: "Tape | None" = None


class Tape:
    """Execution-ordered record of tensor ops for one forward pass."""

    def __init__(self):
        self.nodes: list[Tensor] = []

    def backward(self, output: "Tensor", seed: np.ndarray | None = None) -> None:
        """Accumulate d(output)/d(leaf) into every reachable tensor's .grad."""
        if seed is None:
            seed = np.ones_like(output.data)
        _accumulate(output, seed)
        for node in reversed(self.nodes):
            if node.grad is None or node._vjp is None:
                continue
            node._vjp(node.grad)

    def replay(self) -> None:
        """Recompute every recorded node from current leaf values, in order."""
        for node in self.nodes:
            if node._recompute is not None:
                node.data = node._recompute()


class record:
    """Context manager installing a tape as the active recorder."""

    def __init__(self, tape: Tape):
        self.tape = tape

    def __enter__(self) -> Tape:
        global _TAPE
        self._prev = _TAPE
        _TAPE = self.tape
        return self.tape

    def __exit__(self, *exc) -> None:
        global _TAPE
        _TAPE = self._prev


class Tensor:
    """A float64 array with an optional gradient slot."""

    __slots__ = ("data", "grad", "_vjp", "_recompute")
    __array_ufunc__ = None  # keep numpy from hijacking mixed expressions

    def __init__(self, data, _vjp=None, _recompute=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self._vjp = _vjp
        self._recompute = _recompute

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"

    # operator sugar; scalars are wrapped as constants
    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, exponent):
        return pow_const(self, exponent)

    def __getitem__(self, idx):
        return take(self, idx)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    g = _unbroadcast(g, t.data.shape)
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64)  # own the buffer; g may be a view
    else:
        t.grad += g


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _node(data: np.ndarray, vjp, recompute) -> Tensor:
    tape = _TAPE
    if tape is None:
        return Tensor(data)
    node = Tensor(data, _vjp=vjp, _recompute=recompute)
    tape.nodes.append(node)
    return node


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g)
        _accumulate(b, g)

    return _node(out, vjp, lambda: a.data + b.data)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g)
        _accumulate(b, -g)

    return _node(out, vjp, lambda: a.data - b.data)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g * b.data)
        _accumulate(b, g * a.data)

    return _node(out, vjp, lambda: a.data * b.data)


def div(a: Tensor, b: Tensor) -> Tensor:
    out = a.data / b.data
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g / b.data)
        _accumulate(b, -g * a.data / (b.data * b.data))

    return _node(out, vjp, lambda: a.data / b.data)


def neg(a: Tensor) -> Tensor:
    out = -a.data
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, -g)

    return _node(out, vjp, lambda: -a.data)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data
    if _TAPE is None:
        return Tensor(out)
    a_vec, b_vec = a.data.ndim == 1, b.data.ndim == 1

    def vjp(g):
        if a_vec and b_vec:  # dot product -> scalar
            _accumulate(a, g * b.data)
            _accumulate(b, g * a.data)
        elif b_vec:  # (n,k) @ (k,) -> (n,)
            _accumulate(a, np.outer(g, b.data))
            _accumulate(b, a.data.T @ g)
        elif a_vec:  # (k,) @ (k,m) -> (m,)
            _accumulate(a, b.data @ g)
            _accumulate(b, np.outer(a.data, g))
        else:
            _accumulate(a, g @ b.data.T)
            _accumulate(b, a.data.T @ g)

    return _node(out, vjp, lambda: a.data @ b.data)


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over identical leading axes:
    (..., n, k) @ (..., k, m) -> (..., n, m)."""
    out = np.matmul(a.data, b.data)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, np.matmul(g, np.swapaxes(b.data, -1, -2)))
        _accumulate(b, np.matmul(np.swapaxes(a.data, -1, -2), g))

    return _node(out, vjp, lambda: np.matmul(a.data, b.data))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g, out=out):
        _accumulate(a, g * out)

    return _node(out, vjp, lambda: np.exp(a.data))


def log(a: Tensor) -> Tensor:
    out = np.log(a.data)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g / a.data)

    return _node(out, vjp, lambda: np.log(a.data))


def pow_const(a: Tensor, exponent: float) -> Tensor:
    out = a.data ** exponent
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g * exponent * a.data ** (exponent - 1))

    return _node(out, vjp, lambda: a.data ** exponent)


def tensor_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        gg = g
        if not keepdims and axis is not None:
            gg = np.expand_dims(g, axis)
        _accumulate(a, np.broadcast_to(gg, a.data.shape))

    return _node(out, vjp, lambda: a.data.sum(axis=axis, keepdims=keepdims))


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return tensor_sum(a, axis=axis, keepdims=keepdims) * (1.0 / count)


def cumsum(a: Tensor, axis: int = 0) -> Tensor:
    out = np.cumsum(a.data, axis=axis)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        rev = np.flip(np.cumsum(np.flip(g, axis=axis), axis=axis), axis=axis)
        _accumulate(a, rev)

    return _node(out, vjp, lambda: np.cumsum(a.data, axis=axis))


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g.reshape(a.data.shape))

    return _node(out, vjp, lambda: a.data.reshape(shape))


def transpose(a: Tensor, axes=None) -> Tensor:
    out = np.transpose(a.data, axes)
    if _TAPE is None:
        return Tensor(out)
    inv = None if axes is None else np.argsort(axes)

    def vjp(g):
        _accumulate(a, np.transpose(g, inv))

    return _node(out, vjp, lambda: np.transpose(a.data, axes))


def take(a: Tensor, idx) -> Tensor:
    """Indexing/gather; integer-array indices accumulate repeated rows."""
    out = a.data[idx]
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        buf = np.zeros_like(a.data)
        np.add.at(buf, idx, g)
        _accumulate(a, buf)

    return _node(out, vjp, lambda: a.data[idx])


def concat(parts: list[Tensor], axis: int = 0) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=axis)
    if _TAPE is None:
        return Tensor(out)
    sizes = [p.data.shape[axis] for p in parts]

    def vjp(g):
        offset = 0
        for p, size in zip(parts, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offset, offset + size)
            _accumulate(p, g[tuple(sl)])
            offset += size

    return _node(out, vjp, lambda: np.concatenate([p.data for p in parts], axis=axis))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    out = _sigmoid(a.data)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g, out=out):
        _accumulate(a, g * out * (1.0 - out))

    return _node(out, vjp, lambda: _sigmoid(a.data))


def softplus(a: Tensor) -> Tensor:
    out = np.logaddexp(0.0, a.data)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, g * _sigmoid(a.data))

    return _node(out, vjp, lambda: np.logaddexp(0.0, a.data))


def masked_fill(a: Tensor, keep_mask: np.ndarray, fill_value: float) -> Tensor:
    """Where ``keep_mask`` is True pass through, elsewhere use ``fill_value``."""
    out = np.where(keep_mask, a.data, fill_value)
    if _TAPE is None:
        return Tensor(out)

    def vjp(g):
        _accumulate(a, np.where(keep_mask, g, 0.0))

    return _node(out, vjp, lambda: np.where(keep_mask, a.data, fill_value))


# ---------------------------------------------------------------------------
# composites
# ---------------------------------------------------------------------------

def silu(a: Tensor) -> Tensor:
    return mul(a, sigmoid(a))


def softmax_lastdim(a: Tensor) -> Tensor:
    # shifting by the (detached) row max leaves both value and gradient exact
    shift = Tensor(np.max(a.data, axis=-1, keepdims=True))
    e = exp(sub(a, shift))
    return div(e, tensor_sum(e, axis=-1, keepdims=True))


def logsumexp(a: Tensor, axis: int = -1) -> Tensor:
    shift = Tensor(np.max(a.data, axis=axis, keepdims=True))
    s = tensor_sum(exp(sub(a, shift)), axis=axis, keepdims=True)
    return add(log(s), shift)


def rms_norm(a: Tensor, gain: Tensor, eps: float = 1e-6) -> Tensor:
    """x * gain / sqrt(mean(x^2) + eps) over the last axis."""
    ms = mean(mul(a, a), axis=-1, keepdims=True)
    inv = pow_const(add(ms, Tensor(eps)), -0.5)
    return mul(mul(a, inv), gain)
