"""Paired audio/MIDI dataset: stem matching, seeded split, aligned crops."""

import os
import warnings
from dataclasses import dataclass

import numpy as np

from ..dsp.audio import AudioBuffer
from .midi import midi_to_pianoroll, parse_midi
from .wavio import load_wav


@dataclass(frozen=True)
class AlignedExample:
    """16 kHz mono audio with a note roll at one frame per subband sample."""

    audio: AudioBuffer
    roll: np.ndarray  # (88, len(audio) / n_bands)
    stem: str

    def __post_init__(self):
        if self.roll.shape[1] * (len(self.audio) // self.roll.shape[1]) != len(self.audio):
            raise ValueError("roll frames do not divide the audio length")


def _list_stems(directory, extensions):
    stems = {}
    for name in sorted(os.listdir(directory)):
        base, ext = os.path.splitext(name)
        if ext.lower() in extensions:
            stems[base] = os.path.join(directory, name)
    return stems


class Dataset:
    """Eagerly loaded aligned examples with a seeded train/validation split."""

    def __init__(self, examples, seed, n_bands, val_fraction=0.05):
        if not examples:
            raise ValueError("empty dataset")
        self.examples = examples
        self.n_bands = n_bands
        order = np.random.default_rng(seed).permutation(len(examples))
        n_val = int(round(val_fraction * len(examples)))
        self.val_indices = sorted(int(i) for i in order[:n_val])
        self.train_indices = sorted(int(i) for i in order[n_val:])
        # with a single file the split would starve training; validation then
        # falls back to a fixed training crop, flagged in the metric log
        self.val_is_train = not self.val_indices
        if not self.train_indices:
            self.train_indices = list(range(len(examples)))

    def __len__(self):
        return len(self.examples)

    def train_batch(self, rng, batch_size, crop_len):
        """(audio (B, crop_len), rolls (B, 88, crop_len / n_bands))."""
        if crop_len % self.n_bands:
            raise ValueError(f"crop length {crop_len} not a multiple of n_bands")
        audio = np.empty((batch_size, crop_len))
        rolls = np.empty((batch_size, 88, crop_len // self.n_bands))
        for b in range(batch_size):
            ex = self.examples[self.train_indices[int(rng.integers(len(self.train_indices)))]]
            samples = ex.audio.samples
            if samples.size < crop_len:
                raise ValueError(
                    f"{ex.stem}: file shorter ({samples.size}) than crop {crop_len}")
            slots = (samples.size - crop_len) // self.n_bands + 1
            start = int(rng.integers(slots)) * self.n_bands
            audio[b] = samples[start:start + crop_len]
            f0 = start // self.n_bands
            rolls[b] = ex.roll[:, f0:f0 + crop_len // self.n_bands]
        return audio, rolls

    def val_example(self, crop_len):
        """Fixed evaluation crop (offset 0 of the first validation file)."""
        idx = self.val_indices[0] if self.val_indices else self.train_indices[0]
        ex = self.examples[idx]
        n = min(crop_len, len(ex.audio) - len(ex.audio) % self.n_bands)
        return (ex.audio.samples[:n],
                ex.roll[:, : n // self.n_bands])


def make_dataset(audio_dir, midi_dir, n_bands=16, seed=0, val_fraction=0.05):
    """Pair WAV and MIDI files by stem and build aligned examples.

    Unmatched stems are skipped with a warning; no matched pair is an error.
    """
    audio_files = _list_stems(audio_dir, {".wav"})
    midi_files = _list_stems(midi_dir, {".mid", ".midi"})
    matched = sorted(set(audio_files) & set(midi_files))
    skipped = sorted(set(audio_files) ^ set(midi_files))
    if skipped:
        warnings.warn(f"skipping unmatched stems: {', '.join(skipped)}")
    if not matched:
        raise ValueError(f"no paired examples under {audio_dir} and {midi_dir}")

    frame_rate = 16000.0 / n_bands
    examples = []
    for stem in matched:
        audio = load_wav(audio_files[stem])
        usable = len(audio) - len(audio) % n_bands
        audio = AudioBuffer(audio.samples[:usable], audio.sample_rate)
        notes = parse_midi(midi_files[stem])
        roll = midi_to_pianoroll(notes, usable // n_bands, frame_rate, n_bands)
        examples.append(AlignedExample(audio, roll, stem))
    return Dataset(examples, seed=seed, n_bands=n_bands, val_fraction=val_fraction)
