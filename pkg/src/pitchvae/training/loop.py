"""Two-stage training: representation learning, then adversarial fine-tuning
with the encoder and the aux merge layer frozen.

The loop is single-threaded and fully determined by the config seed; the
metric log is JSON-lines with no timestamps, so identical configs produce
byte-identical logs and checkpoints.
"""

import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..dsp.augment import AugmentSpec, augment
from ..dsp.audio import AudioBuffer
from ..dsp.pqmf import PqmfBank
from ..engine import Tensor, backward, no_grad
from ..engine.spectral import band_synthesis
from ..metrics import TOY_MULTISCALE, multiscale_spectral_distance
from ..model import (
    build_params,
    decode,
    decoder_input,
    encode,
    discriminate,
    merge_aux_temporal,
    reparameterize,
    save_checkpoint,
)
from .adam import adam_step
from .losses import loss_dec, loss_dis, loss_vae


class NumericalError(RuntimeError):
    """Raised when a loss or update stops being finite."""


STAGE1_GROUPS = ("encoder", "aux_fc", "decoder")
STAGE2_GROUPS = ("decoder", "discriminator")


@dataclass(frozen=True)
class TrainConfig:
    beta: float = 0.1
    lr: float = 1e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.9
    adam_eps: float = 1e-8
    batch_size: int = 8
    stage1_steps: int = 0
    stage2_steps: int = 0
    seed: int = 0
    log_every: int = 10
    crop_len: int = 2048
    grad_clip: Optional[float] = None
    val_fraction: float = 0.05
    allpass_sections: int = 0   # waveform augmentation stages (off by default)
    dequantize: bool = False

    def __post_init__(self):
        if self.stage1_steps < 0 or self.stage2_steps < 0:
            raise ValueError("stage step counts must be >= 0")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")


@dataclass
class StageState:
    current_stage: str
    step: int
    frozen: Tuple[str, ...]


def _analysis_batch(x, bank):
    """(B, T) waveforms -> (B, n_bands, T / n_bands) subband frames."""
    B, T = x.shape
    m = bank.n_bands
    if m == 1:
        return x[:, None, :].copy()
    ga, _ = bank.kernels_rfft(T)
    spec = np.fft.rfft(x, axis=1)
    out = np.empty((B, m, T // m))
    for k in range(m):
        out[:, k] = np.fft.irfft(spec * np.conj(ga[k])[None], n=T, axis=1)[:, ::m]
    return out


def _check_finite(value, step, what):
    if not np.isfinite(value):
        raise NumericalError(f"{what} became non-finite at step {step}: {value}")


def _augment_batch(audio, spec, rng):
    if spec.allpass_sections == 0 and not spec.dequantize:
        return audio
    out = np.empty_like(audio)
    for b in range(audio.shape[0]):
        seed = int(rng.integers(2**31))
        out[b] = augment(AudioBuffer(audio[b]), spec, seed).samples
    return out


class _Runner:
    def __init__(self, dataset, cfg, model_cfg, ms_cfg, bank, store):
        self.dataset = dataset
        self.cfg = cfg
        self.mcfg = model_cfg
        self.ms_cfg = ms_cfg
        self.bank = bank
        self.store = store
        self.batch_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
        self.noise_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
        self.aug_spec = AugmentSpec(allpass_sections=cfg.allpass_sections,
                                    dequantize=cfg.dequantize)

    def batch(self):
        audio, rolls = self.dataset.train_batch(
            self.batch_rng, self.cfg.batch_size, self.cfg.crop_len)
        audio = _augment_batch(audio, self.aug_spec, self.batch_rng)
        return audio, rolls

    def forward_stage1(self, audio, rolls):
        bands = _analysis_batch(audio, self.bank)
        q = encode(self.store, self.mcfg, bands, rolls if self.mcfg.aux_mode != "none" else None)
        z = reparameterize(q, int(self.noise_rng.integers(2**31)))
        merged = None
        if self.mcfg.aux_mode != "none":
            merged = merge_aux_temporal(rolls, self.mcfg.stride_product)
        h = decoder_input(self.store, self.mcfg, z, merged)
        m_hat = decode(self.store, self.mcfg, h)
        x_hat = band_synthesis(m_hat, self.bank)
        return q, x_hat

    def decode_from_mean(self, audio, rolls):
        """Stage-2 decoder input: posterior mean through the frozen layers."""
        bands = _analysis_batch(audio, self.bank)
        with no_grad():
            q = encode(self.store, self.mcfg, bands,
                       rolls if self.mcfg.aux_mode != "none" else None)
            merged = None
            if self.mcfg.aux_mode != "none":
                merged = merge_aux_temporal(rolls, self.mcfg.stride_product)
            h = decoder_input(self.store, self.mcfg, q.mean, merged)
        return Tensor(h.data)

    def val_distance(self):
        audio, roll = self.dataset.val_example(self.cfg.crop_len)
        with no_grad():
            bands = _analysis_batch(audio[None], self.bank)
            q = encode(self.store, self.mcfg, bands,
                       roll[None] if self.mcfg.aux_mode != "none" else None)
            merged = None
            if self.mcfg.aux_mode != "none":
                merged = merge_aux_temporal(roll[None], self.mcfg.stride_product)
            h = decoder_input(self.store, self.mcfg, q.mean, merged)
            m_hat = decode(self.store, self.mcfg, h)
            x_hat = band_synthesis(m_hat, self.bank)
        return multiscale_spectral_distance(audio, x_hat.data[0], self.ms_cfg)


def train_two_stage(dataset, cfg, model_cfg, out_dir, ms_cfg=TOY_MULTISCALE):
    """Run both stages; writes metrics.jsonl, ckpt-stage1/, ckpt-final/.

    Returns a summary dict (paths plus first/last logged train distances).
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    os.makedirs(out_dir, exist_ok=True)
    bank = PqmfBank(model_cfg.n_bands)
    store = build_params(model_cfg, cfg.seed)
    runner = _Runner(dataset, cfg, model_cfg, ms_cfg, bank, store)
    log_path = os.path.join(out_dir, "metrics.jsonl")
    summary = {"log": log_path, "first_d_ms": None, "last_d_ms": None}

    def emit(fh, record):
        fh.write(json.dumps(record, sort_keys=True) + "\n")
        if record.get("d_ms") is not None:
            if summary["first_d_ms"] is None:
                summary["first_d_ms"] = record["d_ms"]
            summary["last_d_ms"] = record["d_ms"]

    with open(log_path, "w") as fh:
        # ---------------------------------------------- stage 1
        store.set_trainable(STAGE1_GROUPS)
        state = StageState("representation", 0, frozen=("discriminator",))
        for step in range(1, cfg.stage1_steps + 1):
            state.step = step
            audio, rolls = runner.batch()
            q, x_hat = runner.forward_stage1(audio, rolls)
            total, parts = loss_vae(audio, x_hat, q, cfg.beta, ms_cfg)
            _check_finite(total.item(), step, "stage-1 loss")
            backward(total)
            adam_step(store, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                      groups=STAGE1_GROUPS, grad_clip=cfg.grad_clip)
            store.zero_grads()
            if step % cfg.log_every == 0 or step == cfg.stage1_steps:
                emit(fh, {"step": step, "stage": 1,
                          "loss": total.item(),
                          "d_ms": parts["d_ms"], "kl": parts["kl"],
                          "val_distance": runner.val_distance(),
                          "val_is_train": dataset.val_is_train})

        save_checkpoint(store, os.path.join(out_dir, "ckpt-stage1"), stage=1,
                        meta={"model": dataclasses.asdict(model_cfg)})

        # ---------------------------------------------- stage 2
        store.set_trainable(STAGE2_GROUPS)
        state = StageState("adversarial", 0, frozen=("encoder", "aux_fc"))
        for step in range(1, cfg.stage2_steps + 1):
            state.step = step
            audio, rolls = runner.batch()
            h = runner.decode_from_mean(audio, rolls)

            # discriminator update on a detached reconstruction
            with no_grad():
                m_hat = decode(store, model_cfg, h)
                x_fake = band_synthesis(m_hat, bank).data
            score_real, _ = discriminate(store, model_cfg, audio)
            score_fake, _ = discriminate(store, model_cfg, x_fake)
            d_loss = loss_dis(score_real, score_fake)
            _check_finite(d_loss.item(), step, "discriminator loss")
            backward(d_loss)
            adam_step(store, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                      groups=("discriminator",), grad_clip=cfg.grad_clip)
            store.zero_grads()

            # decoder update through the discriminator
            with no_grad():
                _, feats_real_t = discriminate(store, model_cfg, audio)
            feats_real = [f.data for f in feats_real_t]
            m_hat = decode(store, model_cfg, h)
            x_hat = band_synthesis(m_hat, bank)
            score_fake, feats_fake = discriminate(store, model_cfg, x_hat)
            g_loss, parts = loss_dec(score_fake, audio, x_hat,
                                     feats_real, feats_fake, ms_cfg)
            _check_finite(g_loss.item(), step, "decoder loss")
            backward(g_loss)
            adam_step(store, cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps,
                      groups=("decoder",), grad_clip=cfg.grad_clip)
            store.zero_grads()

            if step % cfg.log_every == 0 or step == cfg.stage2_steps:
                emit(fh, {"step": cfg.stage1_steps + step, "stage": 2,
                          "loss_dis": d_loss.item(), "loss_dec": g_loss.item(),
                          "d_ms": parts["d_ms"], "fm": parts["fm"],
                          "adv": parts["adv"],
                          "val_distance": runner.val_distance(),
                          "val_is_train": dataset.val_is_train})

    save_checkpoint(store, os.path.join(out_dir, "ckpt-final"),
                    stage=2 if cfg.stage2_steps else 1,
                    meta={"model": dataclasses.asdict(model_cfg)})
    summary["stage1_ckpt"] = os.path.join(out_dir, "ckpt-stage1")
    summary["final_ckpt"] = os.path.join(out_dir, "ckpt-final")
    return summary
