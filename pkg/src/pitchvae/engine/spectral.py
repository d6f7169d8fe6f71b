"""Differentiable twins of the spectral metrics, plus the filterbank
synthesis op used on the decoder output path.

The STFT here reproduces the dsp framing convention exactly (periodic Hann,
hop = window/4, reflect padding); magnitudes are sqrt(power + 1e-24) so the
gradient exists at silent bins — the shift is orders of magnitude below the
metric oracles' tolerance.
"""

import numpy as np

from ..dsp.stft import frame_index_map, hann_periodic
from ..metrics import EPS_LOG, EPS_POWER
from .tensor import Tensor, record
from . import ops

_MAG_GUARD = 1e-24


def _dft_matrices(window, dtype):
    k = np.arange(window // 2 + 1)
    n = np.arange(window)
    ang = 2.0 * np.pi * np.outer(n, k) / window
    return np.cos(ang).astype(dtype), (-np.sin(ang)).astype(dtype)


_dft_cache = {}


def stft_magnitude_batch(x, window):
    """x Tensor (B, T) -> magnitudes Tensor (B, n_frames, window/2+1)."""
    B, T = x.data.shape
    if window > T:
        raise ValueError(f"window {window} exceeds signal length {T}")
    key = (window, x.data.dtype.str, T)
    cached = _dft_cache.get(key)
    if cached is None:
        cos_m, sin_m = _dft_matrices(window, x.data.dtype)
        idx = frame_index_map(T, window)
        win = hann_periodic(window).astype(x.data.dtype)
        cached = (cos_m, sin_m, idx, win)
        _dft_cache[key] = cached
    cos_m, sin_m, idx, win = cached
    frames = ops.gather(x, idx)                      # (B, F, W)
    windowed = ops.mul(frames, Tensor(win))
    re = ops.matmul_const(windowed, cos_m)           # (B, F, bins)
    im = ops.matmul_const(windowed, sin_m)
    power = ops.add(ops.square(re), ops.square(im))
    return ops.sqrt(ops.add(power, Tensor(np.asarray(_MAG_GUARD, dtype=x.data.dtype))))


def _sum_per_example(t):
    # (B, F, K) -> (B,)
    n = t.data.shape[1] * t.data.shape[2]
    return ops.mean_axes(t, (1, 2)) * float(n)


def spectral_distance_batch(x_ref, y, window, eps=EPS_POWER):
    """Mean over the batch of the log-power L1 distance; x_ref is constant."""
    mx = stft_magnitude_batch(Tensor(x_ref), window)
    my = stft_magnitude_batch(y, window)
    lx = ops.log(ops.add(ops.square(mx), eps))
    ly = ops.log(ops.add(ops.square(my), eps))
    per = _sum_per_example(ops.absolute(ops.sub(lx, ly)))
    return ops.mean_all(per)


def multiscale_distance_batch(x_ref, y, cfg):
    """Mean over the batch of the multiscale distance; x_ref (B, T) constant."""
    x_ref = np.asarray(x_ref, dtype=y.data.dtype)
    if x_ref.shape != y.data.shape:
        raise ValueError(f"shape mismatch: {x_ref.shape} vs {y.data.shape}")
    # the magnitude floor inside the twin's sqrt keeps spectrogram norms
    # marginally above zero, so the degenerate-reference check must look at
    # the signal itself (an all-zero row is the only way the true norm is 0)
    if np.any(np.max(np.abs(x_ref), axis=1) == 0.0):
        raise ValueError("zero reference")
    total = None
    for w in cfg.windows:
        mx = stft_magnitude_batch(Tensor(x_ref), w)
        ref = np.sqrt(np.sum(mx.data**2, axis=(1, 2)))  # (B,)
        my = stft_magnitude_batch(y, w)
        diff = ops.sub(mx, my)
        frob = ops.sqrt(_sum_per_example(ops.square(diff)))
        term1 = ops.mul(frob, Tensor(1.0 / ref))
        term2 = ops.log(ops.add(_sum_per_example(ops.absolute(diff)), cfg.eps_log))
        scale = ops.add(term1, term2)
        total = scale if total is None else ops.add(total, scale)
    return ops.mean_all(total)


def kl_diag_gaussian_batch(mean, log_var):
    """Mean over the batch of the summed diagonal-Gaussian KL.

    mean, log_var: Tensors (B, d, T).
    """
    if mean.data.shape != log_var.data.shape:
        raise ValueError(f"shape mismatch: {mean.data.shape} vs {log_var.data.shape}")
    B = mean.data.shape[0]
    inner = ops.sub(ops.add(ops.square(mean), ops.exp(log_var)),
                    ops.add(log_var, 1.0))
    return ops.sum_all(inner) * (0.5 / B)


def band_synthesis(m, bank):
    """Differentiable filterbank synthesis: m (B, n_bands, F) -> (B, F * n_bands).

    Forward and adjoint both run as circular convolutions through rfft; the
    whole reassembly is a single tape node.
    """
    B, nb, F = m.data.shape
    if nb != bank.n_bands:
        raise ValueError(f"band count mismatch: {nb} vs bank {bank.n_bands}")
    period = F * nb
    if nb == 1:
        return ops.reshape(m, (B, period))
    _, gs = bank.kernels_rfft(period)

    up = np.zeros((B, period))
    spec = np.zeros((B, period // 2 + 1), dtype=complex)
    for k in range(nb):
        up[:] = 0.0
        up[:, ::nb] = nb * m.data[:, k]
        spec += np.fft.rfft(up, axis=1) * np.conj(gs[k])[None]
    out = Tensor(np.fft.irfft(spec, n=period, axis=1).astype(m.data.dtype))

    def bwd(g):
        gspec = np.fft.rfft(g, axis=1)
        gm = np.empty((B, nb, F), dtype=m.data.dtype)
        for k in range(nb):
            # adjoint of circular correlation = circular convolution
            gup = np.fft.irfft(gspec * gs[k][None], n=period, axis=1)
            gm[:, k] = nb * gup[:, ::nb]
        return (gm,)

    return record(out, (m,), bwd)
