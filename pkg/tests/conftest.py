"""Shared fixtures: deterministic signals, tiny model configs, MIDI bytes."""

import struct

import numpy as np
import pytest

from pitchvae.dsp.audio import AudioBuffer
from pitchvae.model import ModelConfig


def sine(freq, n, rate=16000, amp=0.5, phase=0.0):
    t = np.arange(n) / rate
    return AudioBuffer(amp * np.sin(2 * np.pi * freq * t + phase), rate)


def snr_db(reference, test):
    err = reference - test
    return 10.0 * np.log10(np.sum(reference**2) / max(np.sum(err**2), 1e-300))


def vlq(value):
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def midi_bytes(notes, division=480, tempo=500000, fmt=0):
    """Single-track MIDI bytes. ``notes``: (pitch, onset_s, offset_s, velocity).

    Seconds convert to ticks at the single fixed tempo.
    """
    ticks_per_second = division * 1e6 / tempo
    events = [(0, bytes([0xFF, 0x51, 0x03]) + tempo.to_bytes(3, "big"))]
    for pitch, onset, offset, velocity in notes:
        on_tick = int(round(onset * ticks_per_second))
        off_tick = int(round(offset * ticks_per_second))
        events.append((on_tick, bytes([0x90, pitch, velocity])))
        events.append((off_tick, bytes([0x80, pitch, 0])))
    events.sort(key=lambda e: e[0])
    data = b""
    previous = 0
    for tick, raw in events:
        data += vlq(tick - previous) + raw
        previous = tick
    data += vlq(0) + bytes([0xFF, 0x2F, 0x00])
    track = b"MTrk" + struct.pack(">I", len(data)) + data
    return b"MThd" + struct.pack(">IHHH", 6, fmt, 1, division) + track


def naive_stft_mag(x, window):
    """O(n^2) DFT magnitude oracle: quarter-window hop, half-window reflect
    padding, periodic raised-cosine window, one extra frame."""
    x = np.asarray(x, dtype=np.float64)
    if x.size < window:
        x = np.concatenate([x, np.zeros(window - x.size)])
    hop = window // 4
    padded = np.pad(x, window // 2, mode="reflect")
    n_frames = x.size // hop + 1
    taper = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(window) / window)
    n = np.arange(window)
    bins = window // 2 + 1
    out = np.empty((bins, n_frames))
    for f in range(n_frames):
        seg = padded[f * hop:f * hop + window] * taper
        for b in range(bins):
            re = np.dot(seg, np.cos(2 * np.pi * b * n / window))
            im = -np.dot(seg, np.sin(2 * np.pi * b * n / window))
            out[b, f] = np.hypot(re, im)
    return out


def make_micro_config():
    """Smallest config that exercises every model component."""
    return ModelConfig(
        n_bands=4, n_notes=8, latent_dim=2,
        enc_channels=(3, 4), enc_strides=(2, 2), enc_kernel=5, head_kernel=3,
        dec_up_kernel=4, disc_scales=2, disc_layers=3, disc_channels=(3, 4),
        disc_kernel=5, aux_mode="fc")


@pytest.fixture
def micro_config():
    return make_micro_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
