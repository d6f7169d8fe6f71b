"""Evaluation services: spectrogram export, objective distance reports,
MUSHRA session construction, rating aggregation, and the HTTP service that
hosts listening tests.
"""

from .spectrogram import Spectrogram, export_spectrogram, write_spectrogram_csv
from .report import aggregate_scores, objective_report
from .mushra import build_session
from .server import MushraService, serve

__all__ = [
    "Spectrogram",
    "export_spectrogram",
    "write_spectrogram_csv",
    "aggregate_scores",
    "objective_report",
    "build_session",
    "MushraService",
    "serve",
]
