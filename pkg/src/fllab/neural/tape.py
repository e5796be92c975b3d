"""Minimal reverse-mode autodiff over numpy float64 arrays.

Just enough ops for the transformer and LSTM here: broadcast-aware
arithmetic, matmul, the usual activations, fused masked softmax and layer
norm, embedding gather, relative-position bias gather, a fused LSTM sequence
op (kernel-backed), and a masked MSE loss.
"""

from __future__ import annotations

import numpy as np

from .. import kernels


class Tensor:
    __slots__ = ("data", "grad", "parents", "backward_fn")

    def __init__(self, data, parents=(), backward_fn=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.backward_fn = backward_fn

    @property
    def shape(self):
        return self.data.shape

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        order = []
        seen = set()
        stack = [(self, False)]
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
                stack.append((p, False))
        for node in order:
            node.grad = None
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node.backward_fn is not None and node.grad is not None:
                node.backward_fn(node.grad)


def _accumulate(tensor, grad):
    if tensor.grad is None:
        tensor.grad = grad.copy()
    else:
        tensor.grad += grad


def unbroadcast(grad, shape):
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _as_const(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def add(a, b):
    """a + b; either side may be a plain array treated as a constant."""
    ta, tb = isinstance(a, Tensor), isinstance(b, Tensor)
    data = _as_const(a) + _as_const(b)
    parents = tuple(t for t in (a, b) if isinstance(t, Tensor))

    def backward_fn(grad):
        if ta:
            _accumulate(a, unbroadcast(grad, a.data.shape))
        if tb:
            _accumulate(b, unbroadcast(grad, b.data.shape))

    return Tensor(data, parents, backward_fn)


def mul(a, b):
    ta, tb = isinstance(a, Tensor), isinstance(b, Tensor)
    da, db = _as_const(a), _as_const(b)
    data = da * db
    parents = tuple(t for t in (a, b) if isinstance(t, Tensor))

    def backward_fn(grad):
        if ta:
            _accumulate(a, unbroadcast(grad * db, a.data.shape))
        if tb:
            _accumulate(b, unbroadcast(grad * da, b.data.shape))

    return Tensor(data, parents, backward_fn)


def matmul(a, b):
    data = a.data @ b.data

    def backward_fn(grad):
        _accumulate(a, unbroadcast(grad @ np.swapaxes(b.data, -1, -2), a.data.shape))
        _accumulate(b, unbroadcast(np.swapaxes(a.data, -1, -2) @ grad, b.data.shape))

    return Tensor(data, (a, b), backward_fn)


def relu(a):
    mask = a.data > 0
    return Tensor(a.data * mask, (a,), lambda grad: _accumulate(a, grad * mask))


def sigmoid(a):
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return Tensor(out, (a,), lambda grad: _accumulate(a, grad * out * (1.0 - out)))


def tanh(a):
    out = np.tanh(a.data)
    return Tensor(out, (a,), lambda grad: _accumulate(a, grad * (1.0 - out * out)))


def reshape(a, shape):
    orig = a.data.shape
    return Tensor(a.data.reshape(shape), (a,), lambda grad: _accumulate(a, grad.reshape(orig)))


def transpose(a, axes):
    inverse = np.argsort(axes)
    return Tensor(
        a.data.transpose(axes), (a,), lambda grad: _accumulate(a, grad.transpose(inverse))
    )


def embedding(table, ids):
    """Gather rows of a (V, D) table by an integer id array."""
    ids = np.asarray(ids)
    data = table.data[ids]

    def backward_fn(grad):
        gt = np.zeros_like(table.data)
        np.add.at(gt, ids.reshape(-1), grad.reshape(-1, table.data.shape[1]))
        _accumulate(table, gt)

    return Tensor(data, (table,), backward_fn)


def take_rows(table, n):
    """First n rows of a parameter table (trainable positional encodings)."""
    if n > table.data.shape[0]:
        raise ValueError(f"sequence length {n} exceeds positional table {table.data.shape[0]}")

    def backward_fn(grad):
        gt = np.zeros_like(table.data)
        gt[:n] = grad
        _accumulate(table, gt)

    return Tensor(table.data[:n], (table,), backward_fn)


def rel_bias(table, t_len):
    """Clipped relative-offset logit biases: out[h, i, j] = table[h, min(i-j, K-1)].

    Entries with j > i are produced too but always fall under the causal mask.
    """
    heads, window = table.data.shape
    offs = np.arange(t_len)[:, None] - np.arange(t_len)[None, :]
    idx = np.clip(offs, 0, window - 1)
    data = table.data[:, idx]

    def backward_fn(grad):
        gt = np.zeros_like(table.data)
        for h in range(heads):
            np.add.at(gt[h], idx.reshape(-1), grad[h].reshape(-1))
        _accumulate(table, gt)

    return Tensor(data, (table,), backward_fn)


def masked_softmax(scores, mask):
    """Softmax over the last axis with boolean keep-mask (False = excluded)."""
    neg = np.where(mask, scores.data, -np.inf)
    mx = neg.max(axis=-1, keepdims=True)
    e = np.exp(neg - mx)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward_fn(grad):
        g = out * (grad - (grad * out).sum(axis=-1, keepdims=True))
        _accumulate(scores, g)

    return Tensor(out, (scores,), backward_fn)


def layer_norm(x, gain, bias, eps=1e-5):
    """Normalize over the last axis, then scale and shift."""
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data
    d = x.data.shape[-1]

    def backward_fn(grad):
        _accumulate(gain, unbroadcast(grad * xhat, gain.data.shape))
        _accumulate(bias, unbroadcast(grad, bias.data.shape))
        gx = grad * gain.data
        gxhat = gx * inv
        _accumulate(
            x,
            gxhat
            - gxhat.mean(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True),
        )

    return Tensor(out, (x, gain, bias), backward_fn)


def lstm_seq(x, wx, wh, b):
    """Fused LSTM layer over a (B, T, Din) input; returns (B, T, H).

    The recurrence runs in the active kernel backend; the input/output
    projections and weight gradients are plain numpy matmuls here.
    """
    batch, t_len, din = x.data.shape
    hidden = wh.data.shape[0]
    x_tm = np.ascontiguousarray(x.data.transpose(1, 0, 2))  # (T, B, Din)
    xproj = x_tm.reshape(-1, din) @ wx.data + b.data
    xproj = np.ascontiguousarray(xproj.reshape(t_len, batch, 4 * hidden))
    h_seq, cache = kernels.lstm_forward_core(xproj, wh.data)
    out = h_seq.transpose(1, 0, 2)

    def backward_fn(grad):
        dh_out = np.ascontiguousarray(grad.transpose(1, 0, 2))
        dxproj = kernels.lstm_backward_core(wh.data, cache, dh_out)
        flat = dxproj.reshape(-1, 4 * hidden)
        _accumulate(wx, x_tm.reshape(-1, din).T @ flat)
        _accumulate(b, flat.sum(axis=0))
        h_prev = np.zeros_like(h_seq)
        h_prev[1:] = h_seq[:-1]
        _accumulate(wh, h_prev.reshape(-1, hidden).T @ flat)
        dx = (flat @ wx.data.T).reshape(t_len, batch, din).transpose(1, 0, 2)
        _accumulate(x, dx)

    return Tensor(out, (x, wx, wh, b), backward_fn)


def mse_masked(pred, target, step_mask):
    """Mean squared error over valid steps: mean of (p - y)^2 across every
    unpadded (step, coordinate) cell."""
    target = np.asarray(target, dtype=np.float64)
    m = np.asarray(step_mask, dtype=np.float64)
    if pred.data.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.data.shape} vs {target.shape}")
    diff = (pred.data - target) * m[..., None]
    denom = m.sum() * pred.data.shape[-1]
    data = (diff * diff).sum() / denom

    def backward_fn(grad):
        _accumulate(pred, grad * 2.0 * diff / denom)

    return Tensor(data, (pred,), backward_fn)
