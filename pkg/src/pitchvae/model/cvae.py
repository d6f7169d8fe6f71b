"""Conditional encoder, latent/aux merge, and decoder.

All functions are batched and functional: parameters come from a ParamStore,
activations are engine Tensors, data inputs (subband frames, note rolls) are
plain arrays treated as constants.
"""

from dataclasses import dataclass

import numpy as np

from ..engine import Tensor, ops


@dataclass(frozen=True)
class LatentDistribution:
    """Diagonal Gaussian over the latent sequence: (B, d_z, T_lat) each."""

    mean: Tensor
    log_var: Tensor

    def __post_init__(self):
        if self.mean.data.shape != self.log_var.data.shape:
            raise ValueError(
                f"mean/log_var shape mismatch: {self.mean.data.shape} "
                f"vs {self.log_var.data.shape}")


def _as_batched(arr, channels_name, channels):
    arr = arr.data if isinstance(arr, Tensor) else np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != channels:
        raise ValueError(f"expected (B, {channels}, T) {channels_name}, got {arr.shape}")
    return arr


def encode(store, cfg, bands, roll=None):
    """Subband frames (B, n_bands, F) + note roll (B, n_notes, F) -> LatentDistribution."""
    bands = _as_batched(bands, "subband input", cfg.n_bands)
    frames = bands.shape[2]
    if cfg.aux_mode != "none":
        if roll is None:
            raise ValueError("note roll required unless aux_mode is 'none'")
        roll = _as_batched(roll, "note roll", cfg.n_notes)
        if roll.shape[2] != frames:
            raise ValueError(
                f"frame mismatch: {frames} audio frames vs {roll.shape[2]} roll frames")
        x = Tensor(np.concatenate([bands, roll], axis=1))
    else:
        x = Tensor(bands)
    if frames % cfg.stride_product:
        raise ValueError(
            f"frame count {frames} not divisible by stride product {cfg.stride_product}")
    h = x
    for i, stride in enumerate(cfg.enc_strides):
        h = ops.conv1d(h, store[f"enc.conv{i}.w"], store[f"enc.conv{i}.b"],
                       stride=stride, padding=cfg.enc_kernel // 2)
        h = ops.leaky_relu(h, 0.2)
    h = ops.conv1d(h, store["enc.head.w"], store["enc.head.b"],
                   stride=1, padding=cfg.head_kernel // 2)
    mean = ops.narrow(h, 1, 0, cfg.latent_dim)
    log_var = ops.narrow(h, 1, cfg.latent_dim, cfg.latent_dim)
    return LatentDistribution(mean, log_var)


def merge_aux_temporal(roll, stride):
    """Max-pool a note roll over stride-sized windows: multi-hot columns survive."""
    roll = np.asarray(roll, dtype=np.float64)
    frames = roll.shape[-1]
    if frames % stride:
        raise ValueError(f"frame count {frames} not divisible by stride {stride}")
    pooled = roll.reshape(roll.shape[:-1] + (frames // stride, stride)).max(axis=-1)
    return pooled


def reparameterize(q, seed):
    """z = mean + exp(log_var / 2) * eta, eta ~ N(0, I) from a seeded generator."""
    eta = np.random.default_rng(seed).standard_normal(q.mean.data.shape)
    sigma = ops.exp(ops.mul(q.log_var, 0.5))
    return ops.add(q.mean, ops.mul(sigma, Tensor(eta.astype(q.mean.data.dtype))))


def aux_fc(store, cfg, z, merged_aux):
    """Per-time-step linear merge of latent and pooled note activations."""
    merged_aux = _as_batched(merged_aux, "merged aux", cfg.n_notes)
    if merged_aux.shape[0] != z.data.shape[0] or merged_aux.shape[2] != z.data.shape[2]:
        raise ValueError(
            f"aux/latent shape mismatch: {merged_aux.shape} vs {z.data.shape}")
    h = ops.concat([z, Tensor(merged_aux)], axis=1)
    return ops.conv1d(h, store["aux.fc.w"], store["aux.fc.b"], stride=1, padding=0)


def decoder_input(store, cfg, z, merged_aux=None):
    """Wire the latent (and aux, per aux_mode) into the decoder's input."""
    if cfg.aux_mode == "fc":
        if merged_aux is None:
            raise ValueError("aux_mode 'fc' requires merged note activations")
        return aux_fc(store, cfg, z, merged_aux)
    if cfg.aux_mode == "concat":
        if merged_aux is None:
            raise ValueError("aux_mode 'concat' requires merged note activations")
        merged_aux = _as_batched(merged_aux, "merged aux", cfg.n_notes)
        return ops.concat([z, Tensor(merged_aux)], axis=1)
    return z


def decode(store, cfg, h):
    """Decoder input (B, C, T_lat) -> subband frames (B, n_bands, T_lat * S)."""
    if h.data.ndim != 3 or h.data.shape[1] != cfg.decoder_in_channels:
        raise ValueError(
            f"decoder input must be (B, {cfg.decoder_in_channels}, T), "
            f"got {h.data.shape}")
    y = ops.conv1d(h, store["dec.in.w"], store["dec.in.b"],
                   stride=1, padding=cfg.head_kernel // 2)
    y = ops.leaky_relu(y, 0.2)
    n_up = len(cfg.enc_strides)
    for i in range(n_up):
        y = ops.transposed_conv1d(y, store[f"dec.up{i}.w"], store[f"dec.up{i}.b"],
                                  stride=2, padding=1)
        y = ops.leaky_relu(y, 0.2)
    return ops.conv1d(y, store["dec.out.w"], store["dec.out.b"],
                      stride=1, padding=cfg.enc_kernel // 2)
