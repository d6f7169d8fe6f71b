"""Finite-difference gradient verification."""

import numpy as np

from .tensor import backward, no_grad


def _tensor_list(params):
    if hasattr(params, "tensors"):
        return list(params.tensors())
    if hasattr(params, "values"):
        return list(params.values())
    if hasattr(params, "data"):  # a single tensor
        return [params]
    return list(params)


def grad_check(f, params, step=1e-5, max_coords_per_tensor=None, rng=None):
    """Max relative error between analytic gradients of f() and central
    differences over the elements of every tensor in ``params``.

    Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    By default every element is probed; ``max_coords_per_tensor`` caps the
    probes per tensor with a seeded random selection (every tensor is still
    covered).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    tensors = _tensor_list(params)
    for t in tensors:
        t.grad = None
    loss = f()
    backward(loss)
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy()
                for t in tensors]
    worst = 0.0
    with no_grad():
        for t, ga in zip(tensors, analytic):
            flat = t.data.reshape(-1)
            gflat = ga.reshape(-1)
            indices = range(flat.size)
            if max_coords_per_tensor is not None and flat.size > max_coords_per_tensor:
                chooser = rng if rng is not None else np.random.default_rng(0)
                indices = chooser.choice(flat.size, size=max_coords_per_tensor,
                                         replace=False)
            for i in indices:
                orig = flat[i]
                flat[i] = orig + step
                fp = f().item()
                flat[i] = orig - step
                fm = f().item()
                flat[i] = orig
                numeric = (fp - fm) / (2.0 * step)
                err = abs(gflat[i] - numeric) / max(abs(gflat[i]), abs(numeric), 1e-8)
                if err > worst:
                    worst = err
    for t in tensors:
        t.grad = None
    return worst
