"""Full-file inference: subband analysis -> posterior mean -> pitch-conditioned
decode -> subband synthesis, with pad bookkeeping so the output length always
matches the input length.
"""

import numpy as np

from .dsp.audio import AudioBuffer
from .dsp.pqmf import PqmfBank, pqmf_analysis
from .engine import no_grad
from .engine.spectral import band_synthesis
from .model import decode, decoder_input, encode, merge_aux_temporal, reparameterize
from .data.midi import midi_to_pianoroll, parse_midi
from .data.wavio import load_wav


def load_example(wav_path, midi_path, n_bands):
    """Load a WAV/MIDI pair as (AudioBuffer, note roll) at one roll frame per
    subband sample. Audio is truncated to a whole number of frames."""
    audio = load_wav(wav_path)
    usable = len(audio) - len(audio) % n_bands
    if usable == 0:
        raise ValueError(f"{wav_path}: shorter than one subband frame")
    samples = audio.samples[:usable]
    notes = parse_midi(midi_path)
    roll = midi_to_pianoroll(notes, usable // n_bands, 16000.0 / n_bands, n_bands)
    return AudioBuffer(samples, audio.sample_rate), roll


def reconstruct(store, model_cfg, audio, roll, seed=None):
    """Run the trained pipeline over one clip.

    Uses the posterior mean unless a seed is given (then one sampled latent).
    Returns an AudioBuffer with exactly ``len(audio)`` samples.
    """
    n = len(audio)
    m = model_cfg.n_bands
    if roll.shape[1] * m != n:
        raise ValueError(
            f"roll has {roll.shape[1]} frames; audio needs {n // m}")
    block = m * model_cfg.stride_product
    pad = (-n) % block
    samples = np.concatenate([audio.samples, np.zeros(pad)]) if pad else audio.samples
    frames = samples.size // m
    full_roll = np.zeros((roll.shape[0], frames), dtype=roll.dtype)
    full_roll[:, : roll.shape[1]] = roll

    bank = PqmfBank(m)
    frame = pqmf_analysis(AudioBuffer(samples, audio.sample_rate), bank)
    with no_grad():
        q = encode(store, model_cfg, frame.data[None],
                   full_roll[None] if model_cfg.aux_mode != "none" else None)
        z = q.mean if seed is None else reparameterize(q, seed)
        merged = None
        if model_cfg.aux_mode != "none":
            merged = merge_aux_temporal(full_roll[None], model_cfg.stride_product)
        h = decoder_input(store, model_cfg, z, merged)
        m_hat = decode(store, model_cfg, h)
        x_hat = band_synthesis(m_hat, bank)
    return AudioBuffer(x_hat.data[0][:n], audio.sample_rate)
