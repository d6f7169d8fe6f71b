"""Architecture configuration with desk-scale defaults."""

from dataclasses import dataclass, field
from typing import Tuple


@dataclass(frozen=True)
class ModelConfig:
    n_bands: int = 16
    n_notes: int = 88
    latent_dim: int = 8
    enc_channels: Tuple[int, ...] = (32, 32, 64, 64)
    enc_strides: Tuple[int, ...] = (2, 2, 2, 2)
    enc_kernel: int = 5
    head_kernel: int = 3
    dec_up_kernel: int = 4
    disc_scales: int = 3
    disc_layers: int = 4
    disc_channels: Tuple[int, ...] = (16, 32, 64)
    disc_kernel: int = 7
    # "fc": note activations concatenated at the encoder input and merged with
    #       the latent through a per-step linear layer (the conditioned model);
    # "concat": activations concatenated to the latent directly (plain
    #           conditional-VAE ablation, no linear merge);
    # "none": unconditioned baseline.
    aux_mode: str = "fc"

    def __post_init__(self):
        if self.n_bands < 1 or self.n_bands & (self.n_bands - 1):
            raise ValueError(f"n_bands must be a power of two, got {self.n_bands}")
        if len(self.enc_channels) != len(self.enc_strides):
            raise ValueError("enc_channels and enc_strides must align")
        if self.aux_mode not in ("fc", "concat", "none"):
            raise ValueError(f"unknown aux_mode {self.aux_mode!r}")
        if len(self.disc_channels) != self.disc_layers - 1:
            raise ValueError("disc_channels must list one width per non-final layer")
        if self.enc_kernel % 2 == 0 or self.head_kernel % 2 == 0:
            raise ValueError("encoder kernels must be odd for symmetric padding")
        if self.dec_up_kernel != 2 * 2:
            # upsampling tconv must double the length exactly: K=4, S=2, P=1
            raise ValueError("dec_up_kernel must be 4")
        if any(s != 2 for s in self.enc_strides):
            # each decoder stage doubles, so each encoder stage must halve
            raise ValueError("encoder strides must all be 2")

    @property
    def stride_product(self):
        s = 1
        for v in self.enc_strides:
            s *= v
        return s

    @property
    def encoder_in_channels(self):
        return self.n_bands + (self.n_notes if self.aux_mode != "none" else 0)

    @property
    def decoder_in_channels(self):
        if self.aux_mode == "concat":
            return self.latent_dim + self.n_notes
        return self.latent_dim

    def discriminator_min_length(self):
        """Smallest input length whose coarsest scale still spans the
        final layer's receptive field."""
        rf, stride = 1, 1
        for _ in range(self.disc_layers - 1):
            rf += (self.disc_kernel - 1) * stride
            stride *= 2
        rf += 2 * stride  # final kernel-3 stride-1 layer
        return rf * 2 ** (self.disc_scales - 1)


TOY_CONFIG = ModelConfig()
