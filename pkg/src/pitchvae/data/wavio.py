"""RIFF/WAVE codec: PCM-16 and IEEE float-32, read and write.

PCM-16 normalization divides by 32768, so full-scale positive is
32767/32768 and the PCM write/read round trip is bit-exact.
"""

import struct

import numpy as np

from ..dsp.audio import AudioBuffer
from ..dsp.filters import preprocess

_FMT_PCM = 1
_FMT_FLOAT = 3


def read_wav_raw(path):
    """Parse a WAV file; returns (samples (channels, n), sample_rate).

    No resampling or downmixing — ``load_wav`` layers those on top.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError(f"{path}: malformed header (not a RIFF/WAVE file)")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id, size = struct.unpack_from("<4sI", data, pos)
        pos += 8
        body = data[pos:pos + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise ValueError(f"{path}: malformed fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise ValueError(f"{path}: missing fmt chunk")
    if payload is None:
        raise ValueError(f"{path}: missing data chunk")
    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1:
        raise ValueError(f"{path}: invalid channel count {n_channels}")

    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload, dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _FMT_FLOAT and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise ValueError(
            f"{path}: unsupported codec (format {audio_format}, {bits}-bit); "
            "only PCM-16 and float-32 are readable")
    frames = samples.size // n_channels
    return samples[: frames * n_channels].reshape(frames, n_channels).T, sample_rate


def load_wav(path):
    """Read a WAV file and preprocess it to a mono 16 kHz AudioBuffer."""
    samples, rate = read_wav_raw(path)
    return preprocess(samples if samples.shape[0] > 1 else samples[0],
                      rate, channels=samples.shape[0])


def save_wav(path, buf, fmt="pcm16"):
    """Write an AudioBuffer (or 1-D array at 16 kHz) to a WAV file."""
    if isinstance(buf, AudioBuffer):
        samples, rate = buf.samples, buf.sample_rate
    else:
        samples, rate = np.asarray(buf, dtype=np.float64), 16000
    if fmt == "pcm16":
        pcm = np.clip(np.round(samples * 32768.0), -32768, 32767).astype("<i2")
        payload = pcm.tobytes()
        audio_format, bits = _FMT_PCM, 16
    elif fmt == "float32":
        payload = samples.astype("<f4").tobytes()
        audio_format, bits = _FMT_FLOAT, 32
    else:
        raise ValueError(f"unsupported write format {fmt!r}")
    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, audio_format, 1, rate,
        rate * block_align, block_align, bits,
        b"data", len(payload))
    with open(path, "wb") as fh:
        fh.write(header + payload)
