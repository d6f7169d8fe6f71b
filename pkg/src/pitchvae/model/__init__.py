from .config import ModelConfig, TOY_CONFIG
from .params import ParamStore, build_params, save_checkpoint, load_checkpoint
from .cvae import (
    encode,
    decode,
    aux_fc,
    merge_aux_temporal,
    reparameterize,
    decoder_input,
)
from .discriminator import discriminate

__all__ = [
    "ModelConfig",
    "TOY_CONFIG",
    "ParamStore",
    "build_params",
    "save_checkpoint",
    "load_checkpoint",
    "encode",
    "decode",
    "aux_fc",
    "merge_aux_temporal",
    "reparameterize",
    "decoder_input",
    "discriminate",
]
