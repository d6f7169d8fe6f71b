from .wavio import load_wav, save_wav, read_wav_raw
from .midi import Note, parse_midi, midi_to_pianoroll
from .dataset import AlignedExample, Dataset, make_dataset

__all__ = [
    "load_wav",
    "save_wav",
    "read_wav_raw",
    "Note",
    "parse_midi",
    "midi_to_pianoroll",
    "AlignedExample",
    "Dataset",
    "make_dataset",
]
