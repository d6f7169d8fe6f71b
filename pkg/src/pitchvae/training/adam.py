"""Adam with bias correction; first/second moments live in the ParamStore."""

import numpy as np


def adam_step(store, lr, beta1=0.5, beta2=0.9, eps=1e-8, groups=None, grad_clip=None):
    """One update over every trainable parameter (optionally one group subset).

    Frozen parameters (requires_grad False) are skipped untouched; a trainable
    parameter without a gradient is an error.
    """
    names = [n for n, t in store.items()
             if t.requires_grad and (groups is None or store.group(n) in groups)]
    missing = [n for n in names if store[n].grad is None]
    if missing:
        raise ValueError(f"missing gradients for trainable parameters: {missing}")

    if grad_clip is not None:
        total = np.sqrt(sum(float(np.sum(store[n].grad ** 2)) for n in names))
        if total > grad_clip:
            scale = grad_clip / total
            for n in names:
                store[n].grad = store[n].grad * scale

    for n in names:
        t = store[n]
        state = store.opt_state.get(n)
        if state is None:
            state = {"m": np.zeros_like(t.data), "v": np.zeros_like(t.data), "t": 0}
            store.opt_state[n] = state
        state["t"] += 1
        g = t.grad
        state["m"] = beta1 * state["m"] + (1.0 - beta1) * g
        state["v"] = beta2 * state["v"] + (1.0 - beta2) * (g * g)
        m_hat = state["m"] / (1.0 - beta1 ** state["t"])
        v_hat = state["v"] / (1.0 - beta2 ** state["t"])
        t.data = t.data - lr * m_hat / (np.sqrt(v_hat) + eps)
