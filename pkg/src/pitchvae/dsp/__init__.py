from .pqmf import PqmfBank, pqmf_analysis, pqmf_synthesis, MultibandFrame
from .stft import stft_magnitude
from .filters import make_anchor, preprocess
from .augment import augment, AugmentSpec

__all__ = [
    "PqmfBank",
    "pqmf_analysis",
    "pqmf_synthesis",
    "MultibandFrame",
    "stft_magnitude",
    "make_anchor",
    "preprocess",
    "augment",
    "AugmentSpec",
]
