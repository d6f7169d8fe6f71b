"""Spectral distances and the diagonal-Gaussian KL term.

These are the plain numpy reference implementations; the engine module holds
differentiable twins that follow the same framing convention bit-for-bit.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .dsp.stft import stft_magnitude

EPS_POWER = 1e-7   # floor inside the log-power spectrogram
EPS_LOG = 1e-7     # floor inside the log of the multiscale second term


@dataclass(frozen=True)
class MultiscaleConfig:
    windows: Tuple[int, ...] = (2048, 1024, 512, 256, 128, 64)
    eps_power: float = EPS_POWER
    eps_log: float = EPS_LOG

    def __post_init__(self):
        if any(w < 32 for w in self.windows):
            raise ValueError(f"all windows must be >= 32, got {self.windows}")
        if self.eps_power <= 0 or self.eps_log <= 0:
            raise ValueError("eps values must be positive")


TOY_MULTISCALE = MultiscaleConfig(windows=(256, 128, 64))


def _as_samples(x):
    return x.samples if hasattr(x, "samples") else np.asarray(x, dtype=np.float64)


def spectral_distance(x, y, window, eps=EPS_POWER):
    """L1 norm of the difference of log power spectrograms. Symmetric, >= 0."""
    xs, ys = _as_samples(x), _as_samples(y)
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    mx = stft_magnitude(xs, window)
    my = stft_magnitude(ys, window)
    return float(np.sum(np.abs(np.log(mx**2 + eps) - np.log(my**2 + eps))))


def multiscale_spectral_distance(x, y, cfg=MultiscaleConfig()):
    """Sum over window sizes of a Frobenius-normalized magnitude error plus a
    log-L1 magnitude error.

    Not symmetric: the first term normalizes by the magnitudes of x, which is
    treated as the reference. An all-zero reference is rejected.
    """
    xs, ys = _as_samples(x), _as_samples(y)
    if xs.size != ys.size:
        raise ValueError(f"length mismatch: {xs.size} vs {ys.size}")
    for w in cfg.windows:
        if w > xs.size:
            raise ValueError(f"window {w} exceeds signal length {xs.size}")
    total = 0.0
    for w in cfg.windows:
        mx = stft_magnitude(xs, w)
        my = stft_magnitude(ys, w)
        ref = np.sqrt(np.sum(mx * mx))
        if ref == 0.0:
            raise ValueError("zero reference")
        diff = mx - my
        total += np.sqrt(np.sum(diff * diff)) / ref
        total += np.log(np.sum(np.abs(diff)) + cfg.eps_log)
    return float(total)


def kl_diag_gaussian(mean, log_var):
    """KL(N(mean, exp(log_var)) || N(0, I)), summed over elements."""
    mean = np.asarray(mean, dtype=np.float64)
    log_var = np.asarray(log_var, dtype=np.float64)
    if mean.shape != log_var.shape:
        raise ValueError(f"shape mismatch: {mean.shape} vs {log_var.shape}")
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(log_var))):
        raise ValueError("non-finite inputs")
    # expm1 keeps exp(lv) - 1 - lv nonnegative when log_var is tiny, where
    # the naive form cancels catastrophically and can dip below zero
    return float(0.5 * np.sum(mean**2 + np.expm1(log_var) - log_var))
