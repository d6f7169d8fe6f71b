"""Anchor high-pass filter and ingest preprocessing (downmix + resample)."""

import numpy as np
from scipy.signal import butter, sosfilt

from .audio import AudioBuffer

_ANCHOR_CUTOFF_HZ = 1000.0
_ANCHOR_ORDER = 8
_SINC_HALF_WIDTH = 32  # resampler kernel half-width, in output-rate samples


def make_anchor(x):
    """1 kHz high-pass degradation used as the low end of the rating scale.

    8th-order Butterworth, applied causally (forward only). At 16 kHz this
    gives >= 40 dB attenuation at 500 Hz and < 1 dB deviation above 2 kHz.
    """
    if x.sample_rate != 16000:
        raise ValueError(f"anchor expects 16 kHz input, got {x.sample_rate}")
    sos = butter(_ANCHOR_ORDER, _ANCHOR_CUTOFF_HZ, btype="highpass",
                 fs=x.sample_rate, output="sos")
    return AudioBuffer(sosfilt(sos, x.samples), x.sample_rate)


def _resample_sinc(x, src_rate, dst_rate):
    """Windowed-sinc resampling (Hann window, half-width _SINC_HALF_WIDTH)."""
    if src_rate == dst_rate:
        return x.copy()
    ratio = dst_rate / src_rate
    n_out = int(np.floor(x.size * ratio))
    # output sample t maps to source position t / ratio
    pos = np.arange(n_out) / ratio
    half_src = _SINC_HALF_WIDTH / ratio  # kernel half-width in source samples
    left = np.floor(pos - half_src).astype(int) + 1
    offsets = np.arange(int(np.ceil(2 * half_src)) + 1)
    idx = left[:, None] + offsets[None, :]
    t = (pos[:, None] - idx) * ratio  # in output-rate units
    kernel = np.sinc(t) * (0.5 + 0.5 * np.cos(np.pi * t / _SINC_HALF_WIDTH))
    kernel[np.abs(t) > _SINC_HALF_WIDTH] = 0.0
    kernel *= ratio  # anti-alias gain for downsampling
    valid = (idx >= 0) & (idx < x.size)
    return np.sum(np.where(valid, x[np.clip(idx, 0, x.size - 1)], 0.0) * kernel, axis=1)


def preprocess(x_any, src_rate, channels=1):
    """Raw audio -> mono 16 kHz AudioBuffer.

    Multi-channel input is (channels, samples) and is downmixed by channel
    mean. Already-16k mono input passes through bit-identically.
    """
    if src_rate < 16000:
        raise ValueError("upsampling unsupported")
    x_any = np.asarray(x_any, dtype=np.float64)
    if channels > 1:
        if x_any.ndim != 2 or x_any.shape[0] != channels:
            raise ValueError(f"expected ({channels}, n) input, got shape {x_any.shape}")
        mono = x_any.mean(axis=0)
    else:
        mono = x_any.reshape(-1)
    if src_rate == 16000:
        return AudioBuffer(mono, 16000)
    return AudioBuffer(_resample_sinc(mono, src_rate, 16000), 16000)
