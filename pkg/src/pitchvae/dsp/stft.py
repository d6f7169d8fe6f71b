"""Short-time Fourier magnitudes with a fixed framing convention.

Convention (shared verbatim by the differentiable twin in the engine):
periodic Hann window, hop = window // 4, reflect padding of window // 2 at
both ends, frame count = len(x) // hop + 1, output (window/2 + 1) x frames.
"""

import numpy as np

from .audio import AudioBuffer


def hann_periodic(window):
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(window) / window)


def frame_index_map(length, window):
    """(n_frames, window) indices into the unpadded signal, reflect-extended."""
    hop = window // 4
    pad = window // 2
    padded = np.pad(np.arange(length), (pad, pad), mode="reflect")
    n_frames = length // hop + 1
    starts = np.arange(n_frames) * hop
    return padded[starts[:, None] + np.arange(window)[None, :]]


def stft_magnitude(x, window):
    """|STFT| with the module convention; returns (window/2+1) x n_frames."""
    samples = x.samples if isinstance(x, AudioBuffer) else np.asarray(x, dtype=np.float64)
    if window < 4:
        raise ValueError(f"window must be at least 4, got {window}")
    if window & (window - 1):
        raise ValueError(f"window must be a power of two, got {window}")
    if samples.size < window:
        samples = np.pad(samples, (0, window - samples.size))
    frames = samples[frame_index_map(samples.size, window)]
    spec = np.fft.rfft(frames * hann_periodic(window), axis=1)
    return np.abs(spec).T
