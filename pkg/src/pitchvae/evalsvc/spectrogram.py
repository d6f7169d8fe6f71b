"""Log-magnitude spectrogram export for figures and CSV dumps."""

import csv
from dataclasses import dataclass

import numpy as np

from ..dsp.stft import stft_magnitude

DB_EPS = 1e-7


@dataclass(frozen=True)
class Spectrogram:
    """dB magnitude grid: rows are frequency bins, columns are frames."""

    db: np.ndarray
    freqs_hz: np.ndarray
    times_s: np.ndarray
    window: int
    hop: int
    sample_rate: int


def export_spectrogram(x, window, eps=DB_EPS):
    """20*log10(|STFT| + eps) with axis metadata.

    The grid has window/2 + 1 rows and one column per frame.
    """
    samples = x.samples if hasattr(x, "samples") else np.asarray(x, dtype=np.float64)
    rate = getattr(x, "sample_rate", 16000)
    mag = stft_magnitude(samples, window)
    hop = window // 4
    n_bins, n_frames = mag.shape
    return Spectrogram(
        db=20.0 * np.log10(mag + eps),
        freqs_hz=np.arange(n_bins) * (rate / window),
        times_s=np.arange(n_frames) * (hop / rate),
        window=window,
        hop=hop,
        sample_rate=rate,
    )


def write_spectrogram_csv(spec, path):
    """One row per frequency bin: bin frequency followed by per-frame dB."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz"] + [f"{t:.6f}" for t in spec.times_s])
        for freq, row in zip(spec.freqs_hz, spec.db):
            writer.writerow([f"{freq:.6f}"] + [f"{v:.6f}" for v in row])
