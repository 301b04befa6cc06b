"""Minimal reverse-mode autodiff over numpy arrays.

Tape-style: every op returns a :class:`Var` carrying the forward value and
a closure that routes the incoming adjoint to its parents. ``backward``
topologically sorts the graph from the loss and runs the closures once.
Only the ops needed by the weight-conditioned actor/critic and its PPO
loss are provided; inputs that never need gradients (observations,
preference weights, masks, advantages) are passed as plain ndarrays.
"""

from __future__ import annotations

import numpy as np

MASK_FILL = -1e8  # pre-softmax value assigned to invalid action logits


class TapeError(RuntimeError):
    """Raised on invalid tape usage (e.g. backward before forward)."""


class Var:
    __slots__ = ("data", "grad", "parents", "_bwd")

    def __init__(self, data, parents=(), bwd=None):
        self.data = np.asarray(data)
        self.grad = None
        self.parents = parents
        self._bwd = bwd

    @property
    def shape(self):
        return self.data.shape


def _accum(v: Var, g: np.ndarray) -> None:
    if v.grad is None:
        v.grad = np.array(g, dtype=v.data.dtype, copy=True)
    else:
        v.grad += g


def backward(root: Var) -> None:
    """Accumulate gradients of ``root`` (a scalar) into every leaf's .grad."""
    if root.data.ndim != 0 and root.data.size != 1:
        raise TapeError(f"backward root must be scalar, got shape {root.shape}")
    order: list[Var] = []
    seen: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    root.grad = np.ones_like(root.data)
    for node in reversed(order):
        if node._bwd is not None and node.grad is not None:
            node._bwd(node.grad)


def leaf(data) -> Var:
    return Var(data)


def linear(x: Var, w: Var, b: Var) -> Var:
    """Affine map: x (B,I) @ w (I,O) + b (O)."""
    out = Var(x.data @ w.data + b.data, (x, w, b))

    def bwd(g):
        _accum(x, g @ w.data.T)
        _accum(w, x.data.T @ g)
        _accum(b, g.sum(axis=0))

    out._bwd = bwd
    return out


def tanh(x: Var) -> Var:
    y = np.tanh(x.data)
    out = Var(y, (x,))

    def bwd(g):
        _accum(x, g * (1.0 - y * y))

    out._bwd = bwd
    return out


def mul(a: Var, b: Var) -> Var:
    """Element-wise product of equally shaped vars."""
    out = Var(a.data * b.data, (a, b))

    def bwd(g):
        _accum(a, g * b.data)
        _accum(b, g * a.data)

    out._bwd = bwd
    return out


def add(a: Var, b: Var) -> Var:
    out = Var(a.data + b.data, (a, b))

    def bwd(g):
        _accum(a, g)
        _accum(b, g)

    out._bwd = bwd
    return out


def add_const(x: Var, c) -> Var:
    out = Var(x.data + c, (x,))
    out._bwd = lambda g: _accum(x, g)
    return out


def scale(x: Var, c: float) -> Var:
    out = Var(x.data * c, (x,))
    out._bwd = lambda g: _accum(x, g * c)
    return out


def mul_const(x: Var, c) -> Var:
    """Element-wise product with a constant array (no gradient into c)."""
    c = np.asarray(c)
    out = Var(x.data * c, (x,))
    out._bwd = lambda g: _accum(x, g * c)
    return out


def exp(x: Var) -> Var:
    y = np.exp(x.data)
    out = Var(y, (x,))
    out._bwd = lambda g: _accum(x, g * y)
    return out


def reshape(x: Var, shape) -> Var:
    out = Var(x.data.reshape(shape), (x,))
    out._bwd = lambda g: _accum(x, g.reshape(x.data.shape))
    return out


def scalarize(z: Var, w: np.ndarray) -> Var:
    """Contract per-objective logits z (B,A,d) with weights w (B,d) -> (B,A)."""
    w = np.asarray(w)
    out = Var(np.einsum("bad,bd->ba", z.data, w), (z,))
    out._bwd = lambda g: _accum(z, np.einsum("ba,bd->bad", g, w))
    return out


def masked_log_softmax(z: Var, valid: np.ndarray) -> Var:
    """Log-softmax of z (B,A) restricted to ``valid`` (B,A boolean).

    Invalid logits are treated as ``MASK_FILL`` regardless of their actual
    value, so neither the distribution nor any gradient depends on them.
    Rows must have at least one valid entry.
    """
    valid = np.asarray(valid, dtype=bool)
    if not np.all(valid.any(axis=-1)):
        raise InvalidMaskError("softmax row with no valid action")
    zm = np.where(valid, z.data, MASK_FILL)
    zmax = zm.max(axis=-1, keepdims=True)
    shifted = zm - zmax
    log_norm = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - log_norm
    p_valid = np.where(valid, np.exp(logp), 0.0)
    out = Var(logp, (z,))

    def bwd(g):
        g_masked = np.where(valid, g, 0.0)
        row = g_masked.sum(axis=-1, keepdims=True)
        _accum(z, g_masked - p_valid * row)

    out._bwd = bwd
    return out


class InvalidMaskError(ValueError):
    """An action mask left no feasible action."""


def gather(x: Var, idx: np.ndarray) -> Var:
    """Select x[b, idx[b]] for each batch row b."""
    idx = np.asarray(idx, dtype=np.int64)
    rows = np.arange(x.data.shape[0])
    out = Var(x.data[rows, idx], (x,))

    def bwd(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, (rows, idx), g)
        _accum(x, gx)

    out._bwd = bwd
    return out


def clip(x: Var, lo: float, hi: float) -> Var:
    y = np.clip(x.data, lo, hi)
    inside = (x.data > lo) & (x.data < hi)
    out = Var(y, (x,))
    out._bwd = lambda g: _accum(x, g * inside)
    return out


def minimum(a: Var, b: Var) -> Var:
    take_a = a.data <= b.data  # ties route to the unclipped branch
    out = Var(np.where(take_a, a.data, b.data), (a, b))

    def bwd(g):
        _accum(a, g * take_a)
        _accum(b, g * ~take_a)

    out._bwd = bwd
    return out


def sum_all(x: Var) -> Var:
    out = Var(np.asarray(x.data.sum(), dtype=x.data.dtype), (x,))
    out._bwd = lambda g: _accum(x, np.full_like(x.data, g))
    return out


def mean_all(x: Var) -> Var:
    return scale(sum_all(x), 1.0 / x.data.size)


def neg(x: Var) -> Var:
    return scale(x, -1.0)


def sub_const(x: Var, c) -> Var:
    return add_const(x, -np.asarray(c))
