"""Differentiable operations over engine Tensors.

Every op validates shapes up front (errors name the op and the offending
shapes), computes the forward value with numpy, and registers a backward
closure on the active tape via ``record``.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import Tensor, record


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def _shape_error(op, *shapes):
    return ValueError(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# ---------------------------------------------------------------- elementwise

def add(a, b):
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data + b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape),
                                          _unbroadcast(g, b.data.shape)))


def sub(a, b):
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data - b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape),
                                          _unbroadcast(-g, b.data.shape)))


def mul(a, b):
    a, b = _wrap(a), _wrap(b)
    out = Tensor(a.data * b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g * b.data, a.data.shape),
                                          _unbroadcast(g * a.data, b.data.shape)))


def neg(a):
    out = Tensor(-a.data)
    return record(out, (a,), lambda g: (-g,))


def exp(a):
    y = np.exp(a.data)
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * y,))


def log(a):
    out = Tensor(np.log(a.data))
    return record(out, (a,), lambda g: (g / a.data,))


def absolute(a):
    out = Tensor(np.abs(a.data))
    # subgradient 0 at the kink
    return record(out, (a,), lambda g: (g * np.sign(a.data),))


def square(a):
    out = Tensor(a.data * a.data)
    return record(out, (a,), lambda g: (g * 2.0 * a.data,))


def sqrt(a):
    y = np.sqrt(a.data)
    out = Tensor(y)
    # guarded so a zero radicand yields subgradient 0 instead of inf
    safe = np.where(y > 0.0, y, 1.0)
    return record(out, (a,), lambda g: (np.where(y > 0.0, g * 0.5 / safe, 0.0),))


def relu(a):
    mask = a.data > 0.0
    out = Tensor(np.where(mask, a.data, 0.0))
    return record(out, (a,), lambda g: (g * mask,))


def leaky_relu(a, slope=0.2):
    mask = a.data > 0.0
    out = Tensor(np.where(mask, a.data, slope * a.data))
    return record(out, (a,), lambda g: (g * np.where(mask, 1.0, slope),))


def tanh(a):
    y = np.tanh(a.data)
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a):
    y = 1.0 / (1.0 + np.exp(-a.data))
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * y * (1.0 - y),))


# ------------------------------------------------------------------ structure

def reshape(a, shape):
    out = Tensor(a.data.reshape(shape))
    src = a.data.shape
    return record(out, (a,), lambda g: (g.reshape(src),))


def concat(tensors, axis=1):
    tensors = [_wrap(t) for t in tensors]
    base = list(tensors[0].data.shape)
    for t in tensors[1:]:
        s = list(t.data.shape)
        if len(s) != len(base) or any(i != axis and s[i] != base[i] for i in range(len(s))):
            raise _shape_error("concat", *(t.data.shape for t in tensors))
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.split(g, splits, axis=axis))

    return record(out, tuple(tensors), bwd)


def narrow(a, axis, start, length):
    idx = [slice(None)] * a.data.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out = Tensor(a.data[idx])

    def bwd(g):
        full = np.zeros_like(a.data)
        full[idx] = g
        return (full,)

    return record(out, (a,), bwd)


def gather(a, idx):
    """Index the last axis with an integer array; backward scatter-adds."""
    out = Tensor(a.data[..., idx])
    lead = a.data.shape[:-1]

    def bwd(g):
        full = np.zeros_like(a.data)
        if lead:
            flat = full.reshape(-1, full.shape[-1])
            gf = g.reshape(flat.shape[0], *idx.shape)
            for row in range(flat.shape[0]):
                np.add.at(flat[row], idx, gf[row])
        else:
            np.add.at(full, idx, g)
        return (full,)

    return record(out, (a,), bwd)


# ------------------------------------------------------------------ reductions

def sum_all(a):
    out = Tensor(np.sum(a.data))
    shp = a.data.shape
    return record(out, (a,), lambda g: (np.broadcast_to(g, shp).copy(),))


def mean_all(a):
    n = a.data.size
    out = Tensor(np.mean(a.data))
    shp = a.data.shape
    return record(out, (a,), lambda g: (np.broadcast_to(g / n, shp).copy(),))


def mean_axes(a, axes):
    axes = tuple(sorted(ax % a.data.ndim for ax in axes))
    out = Tensor(np.mean(a.data, axis=axes))
    n = int(np.prod([a.data.shape[ax] for ax in axes]))
    shp = a.data.shape

    def bwd(g):
        ge = np.expand_dims(g, axes)
        return (np.broadcast_to(ge / n, shp).copy(),)

    return record(out, (a,), bwd)


def avg_pool2(a):
    """Halve the last axis by averaging adjacent pairs (length must be even)."""
    if a.data.shape[-1] % 2 != 0:
        raise _shape_error("avg_pool2", a.data.shape)
    out = Tensor(0.5 * (a.data[..., 0::2] + a.data[..., 1::2]))

    def bwd(g):
        full = np.empty_like(a.data)
        full[..., 0::2] = 0.5 * g
        full[..., 1::2] = 0.5 * g
        return (full,)

    return record(out, (a,), bwd)


# --------------------------------------------------------------------- linear

def dense(x, w, b=None):
    """x (N, in) @ w (in, out) + b."""
    if x.data.ndim != 2 or w.data.ndim != 2 or x.data.shape[1] != w.data.shape[0]:
        raise _shape_error("dense", x.data.shape, w.data.shape)
    y = x.data @ w.data
    if b is not None:
        if b.data.shape != (w.data.shape[1],):
            raise _shape_error("dense bias", b.data.shape, w.data.shape)
        y = y + b.data

    out = Tensor(y)

    def bwd(g):
        gx = g @ w.data.T
        gw = x.data.T @ g
        gb = g.sum(axis=0) if b is not None else None
        return (gx, gw, gb) if b is not None else (gx, gw)

    inputs = (x, w, b) if b is not None else (x, w)
    return record(out, inputs, bwd)


def matmul_const(x, m):
    """Right-multiply by a constant matrix: (..., k) @ (k, j)."""
    m = np.asarray(m)
    if x.data.shape[-1] != m.shape[0]:
        raise _shape_error("matmul_const", x.data.shape, m.shape)
    out = Tensor(x.data @ m)
    return record(out, (x,), lambda g: (g @ m.T,))


# --------------------------------------------------------------- convolutions

def conv1d(x, w, b=None, stride=1, padding=0):
    """x (B, C_in, T), w (C_out, C_in, K) -> (B, C_out, T_out); floor semantics."""
    if x.data.ndim != 3 or w.data.ndim != 3 or x.data.shape[1] != w.data.shape[1]:
        raise _shape_error("conv1d", x.data.shape, w.data.shape)
    B, Cin, T = x.data.shape
    Cout, _, K = w.data.shape
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)))
    span = T + 2 * padding - K
    if span < 0:
        raise _shape_error("conv1d (kernel larger than padded input)",
                           x.data.shape, w.data.shape)
    T_out = span // stride + 1
    win = sliding_window_view(xp, K, axis=2)[:, :, ::stride][:, :, :T_out]
    # (B*T_out, Cin*K) @ (Cin*K, Cout): one GEMM
    cols = win.transpose(0, 2, 1, 3).reshape(B * T_out, Cin * K)
    y = (cols @ w.data.reshape(Cout, Cin * K).T).reshape(B, T_out, Cout)
    y = y.transpose(0, 2, 1)
    if b is not None:
        if b.data.shape != (Cout,):
            raise _shape_error("conv1d bias", b.data.shape, w.data.shape)
        y = y + b.data[:, None]

    out = Tensor(np.ascontiguousarray(y))

    def bwd(g):
        gmat = g.transpose(0, 2, 1).reshape(B * T_out, Cout)
        gw = (gmat.T @ cols).reshape(Cout, Cin, K)
        gcols = gmat @ w.data.reshape(Cout, Cin * K)
        gwin = gcols.reshape(B, T_out, Cin, K).transpose(0, 2, 1, 3)
        gxp = np.zeros_like(xp)
        for k in range(K):
            gxp[:, :, k:k + stride * T_out:stride] += gwin[:, :, :, k]
        gx = gxp[:, :, padding:padding + T] if padding else gxp
        gb = g.sum(axis=(0, 2)) if b is not None else None
        return (gx, gw, gb) if b is not None else (gx, gw)

    inputs = (x, w, b) if b is not None else (x, w)
    return record(out, inputs, bwd)


def transposed_conv1d(x, w, b=None, stride=1, padding=0):
    """x (B, C_in, T), w (C_in, C_out, K) -> (B, C_out, (T-1)*stride - 2p + K)."""
    if x.data.ndim != 3 or w.data.ndim != 3 or x.data.shape[1] != w.data.shape[0]:
        raise _shape_error("transposed_conv1d", x.data.shape, w.data.shape)
    B, Cin, T = x.data.shape
    _, Cout, K = w.data.shape
    L = (T - 1) * stride + K
    T_out = L - 2 * padding
    if T_out <= 0:
        raise _shape_error("transposed_conv1d (padding swallows output)",
                           x.data.shape, w.data.shape)
    full = np.zeros((B, Cout, L), dtype=x.data.dtype)
    for k in range(K):
        full[:, :, k:k + stride * T:stride] += np.einsum(
            "bit,io->bot", x.data, w.data[:, :, k], optimize=True)
    y = full[:, :, padding:L - padding] if padding else full
    if b is not None:
        if b.data.shape != (Cout,):
            raise _shape_error("transposed_conv1d bias", b.data.shape, w.data.shape)
        y = y + b.data[:, None]

    out = Tensor(np.ascontiguousarray(y))

    def bwd(g):
        gf = np.pad(g, ((0, 0), (0, 0), (padding, padding))) if padding else g
        gx = np.zeros_like(x.data)
        gw = np.zeros_like(w.data)
        for k in range(K):
            gslice = gf[:, :, k:k + stride * T:stride]
            gx += np.einsum("bot,io->bit", gslice, w.data[:, :, k], optimize=True)
            gw[:, :, k] = np.einsum("bit,bot->io", x.data, gslice, optimize=True)
        gb = g.sum(axis=(0, 2)) if b is not None else None
        return (gx, gw, gb) if b is not None else (gx, gw)

    inputs = (x, w, b) if b is not None else (x, w)
    return record(out, inputs, bwd)


# ------------------------------------------------------- operator conveniences

Tensor.__add__ = lambda self, other: add(self, other)
Tensor.__radd__ = lambda self, other: add(other, self)
Tensor.__sub__ = lambda self, other: sub(self, other)
Tensor.__rsub__ = lambda self, other: sub(other, self)
Tensor.__mul__ = lambda self, other: mul(self, other)
Tensor.__rmul__ = lambda self, other: mul(other, self)
Tensor.__neg__ = lambda self: neg(self)
