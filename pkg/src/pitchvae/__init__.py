"""Pitch-conditioned multiband waveform autoencoder and evaluation toolkit."""

__version__ = "0.1.0"
