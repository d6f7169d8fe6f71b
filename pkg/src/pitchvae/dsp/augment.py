"""Seeded data augmentation: random crop, random-phase all-pass, dequantization."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio import AudioBuffer


@dataclass(frozen=True)
class AugmentSpec:
    crop_len: Optional[int] = None  # None disables cropping
    crop_multiple: int = 1          # crop offsets snap to this grid
    allpass_sections: int = 0       # first-order all-pass cascade depth
    dequantize: bool = False        # add one 16-bit quantization step of noise


def _allpass_response(coeff, n_fft):
    # H(z) = (a + z^-1) / (1 + a z^-1): unit magnitude everywhere
    w = 2.0 * np.pi * np.arange(n_fft // 2 + 1) / n_fft
    z1 = np.exp(-1j * w)
    return (coeff + z1) / (1.0 + coeff * z1)


def augment(x, spec, seed):
    """Apply the enabled stages deterministically for a given seed.

    The all-pass stage disperses phase only (per-bin FFT magnitude is exactly
    preserved); dequantization adds uniform noise of one quantization step at
    16-bit scale.
    """
    rng = np.random.default_rng(seed)
    samples = x.samples
    if spec.crop_len is not None:
        if spec.crop_len > samples.size:
            raise ValueError(
                f"crop length {spec.crop_len} exceeds signal length {samples.size}")
        grid = spec.crop_multiple
        slots = (samples.size - spec.crop_len) // grid + 1
        start = int(rng.integers(slots)) * grid
        samples = samples[start:start + spec.crop_len]
    if spec.allpass_sections > 0:
        spec_x = np.fft.rfft(samples)
        for _ in range(spec.allpass_sections):
            coeff = rng.uniform(-0.9, 0.9)
            spec_x = spec_x * _allpass_response(coeff, samples.size)
        samples = np.fft.irfft(spec_x, n=samples.size)
    if spec.dequantize:
        samples = samples + rng.uniform(-0.5, 0.5, samples.size) / 32768.0
    return AudioBuffer(samples, x.sample_rate)
