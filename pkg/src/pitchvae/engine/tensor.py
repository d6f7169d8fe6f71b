"""Reverse-mode autodiff core: tensors and a per-context gradient tape.

Forward ops append (output, inputs, backward_fn) records to the active tape;
``backward`` walks the records in reverse, accumulating gradients by summation.
The tape order is the execution order, which is already topological.
"""

import threading
from contextlib import contextmanager

import numpy as np

_state = threading.local()

_DEFAULT_DTYPE = np.float64


def set_default_dtype(dtype):
    # training may run single precision; the gradient-check suite pins float64
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError(f"unsupported dtype {dtype}")
    _DEFAULT_DTYPE = dtype.type


def default_dtype():
    return _DEFAULT_DTYPE


class Tensor:
    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=_DEFAULT_DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ValueError(f"item() needs a single element, got shape {self.data.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad = self.grad + g

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


class _Node:
    __slots__ = ("out", "inputs", "fn")

    def __init__(self, out, inputs, fn):
        self.out = out
        self.inputs = inputs
        self.fn = fn


class Tape:
    """Ordered record of differentiable operations for one execution context."""

    def __init__(self):
        self.nodes = []

    def record(self, out, inputs, fn):
        self.nodes.append(_Node(out, inputs, fn))

    def clear(self):
        self.nodes.clear()

    def __len__(self):
        return len(self.nodes)


def active_tape():
    tape = getattr(_state, "tape", None)
    if tape is None:
        tape = Tape()
        _state.tape = tape
    return tape


def _grad_enabled():
    return getattr(_state, "grad_enabled", True)


@contextmanager
def no_grad():
    prev = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = prev


def tensor(data, requires_grad=False):
    return Tensor(data, requires_grad=requires_grad)


def constant(data):
    return Tensor(data, requires_grad=False)


def parameter(data):
    return Tensor(data, requires_grad=True)


def record(out, inputs, fn):
    """Attach a backward rule if gradients are enabled and any input needs them."""
    if _grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        active_tape().record(out, inputs, fn)
    return out


def backward(loss):
    """Populate .grad on every requires_grad tensor reachable from ``loss``.

    Gradients accumulate by summation across fan-out; the tape is cleared
    afterward, so one forward/backward cycle per tape.
    """
    if loss.data.ndim != 0 and loss.data.size != 1:
        raise ValueError(f"backward expects a scalar loss, got shape {loss.data.shape}")
    tape = active_tape()
    loss.accumulate_grad(np.ones_like(loss.data))
    try:
        for node in reversed(tape.nodes):
            g = node.out.grad
            if g is None:
                continue  # branch that never reached the loss
            grads = node.fn(g)
            for t, gi in zip(node.inputs, grads):
                if gi is not None and t.requires_grad:
                    t.accumulate_grad(gi)
            if node.out is not loss:
                node.out.grad = None  # free intermediates as the walk passes them
    finally:
        tape.clear()
