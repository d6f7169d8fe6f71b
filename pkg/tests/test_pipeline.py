"""Whole-file inference path: example loading and length-preserving
reconstruction."""

import dataclasses

import numpy as np
import pytest

from pitchvae.data.wavio import save_wav
from pitchvae.model.params import build_params
from pitchvae.pipeline import load_example, reconstruct

from conftest import midi_bytes, sine


@pytest.fixture()
def pipe_config(micro_config):
    return dataclasses.replace(micro_config, n_notes=88)


def _example_files(tmp_path, n_samples=4000, freq=220.0, note=45):
    wav = tmp_path / "clip.wav"
    save_wav(wav, sine(freq, n_samples))
    mid = tmp_path / "clip.mid"
    mid.write_bytes(midi_bytes([(note, 0.0, n_samples / 16000.0, 90)]))
    return wav, mid


class TestLoadExample:
    def test_truncates_to_whole_frames(self, tmp_path):
        wav, mid = _example_files(tmp_path, n_samples=4003)
        audio, roll = load_example(wav, mid, n_bands=4)
        assert len(audio) == 4000
        assert roll.shape == (88, 1000)

    def test_roll_reflects_the_note(self, tmp_path):
        wav, mid = _example_files(tmp_path, n_samples=4000, note=45)
        _, roll = load_example(wav, mid, n_bands=4)
        assert np.all(roll[45 - 21] == 1.0)
        assert np.all(roll[np.arange(88) != 45 - 21] == 0.0)

    def test_too_short_file_rejected(self, tmp_path):
        wav, mid = _example_files(tmp_path, n_samples=3)
        with pytest.raises(ValueError, match="shorter than one subband frame"):
            load_example(wav, mid, n_bands=4)


class TestReconstruct:
    def test_output_length_matches_input_exactly(self, tmp_path, pipe_config):
        store = build_params(pipe_config, seed=0, zero_heads=False)
        wav, mid = _example_files(tmp_path, n_samples=4000)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        out = reconstruct(store, pipe_config, audio, roll)
        assert len(out) == 4000
        assert out.sample_rate == 16000
        assert np.all(np.isfinite(out.samples))

    def test_non_block_multiple_lengths_are_padded_and_trimmed(
            self, tmp_path, pipe_config):
        # n_bands * stride_product = 16; 4004 samples is 4-band aligned but
        # not block aligned, forcing the internal pad path.
        store = build_params(pipe_config, seed=0, zero_heads=False)
        wav, mid = _example_files(tmp_path, n_samples=4004)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        assert len(audio) % (pipe_config.n_bands
                             * pipe_config.stride_product) != 0
        out = reconstruct(store, pipe_config, audio, roll)
        assert len(out) == len(audio)

    def test_posterior_mean_path_is_deterministic(self, tmp_path, pipe_config):
        store = build_params(pipe_config, seed=0, zero_heads=False)
        wav, mid = _example_files(tmp_path)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        a = reconstruct(store, pipe_config, audio, roll)
        b = reconstruct(store, pipe_config, audio, roll)
        assert a.samples.tobytes() == b.samples.tobytes()

    def test_sampled_path_differs_from_mean_but_is_seed_stable(
            self, tmp_path, pipe_config):
        store = build_params(pipe_config, seed=0, zero_heads=False)
        wav, mid = _example_files(tmp_path)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        mean_out = reconstruct(store, pipe_config, audio, roll)
        s1 = reconstruct(store, pipe_config, audio, roll, seed=1)
        s1_again = reconstruct(store, pipe_config, audio, roll, seed=1)
        s2 = reconstruct(store, pipe_config, audio, roll, seed=2)
        assert s1.samples.tobytes() == s1_again.samples.tobytes()
        assert s1.samples.tobytes() != mean_out.samples.tobytes()
        assert s1.samples.tobytes() != s2.samples.tobytes()

    def test_zero_initialized_output_layers_emit_silence(self, tmp_path, pipe_config):
        # Zeroed output layers make the decoder emit exactly zero in every
        # band; synthesis of all-zero bands is exactly zero.
        store = build_params(pipe_config, seed=0, zero_output_layers=True)
        wav, mid = _example_files(tmp_path)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        out = reconstruct(store, pipe_config, audio, roll)
        np.testing.assert_array_equal(out.samples, 0.0)

    def test_roll_frame_mismatch_rejected(self, tmp_path, pipe_config):
        store = build_params(pipe_config, seed=0)
        wav, mid = _example_files(tmp_path, n_samples=4000)
        audio, roll = load_example(wav, mid, pipe_config.n_bands)
        with pytest.raises(ValueError, match="roll has 999 frames"):
            reconstruct(store, pipe_config, audio, roll[:, :-1])

    def test_aux_mode_none_ignores_the_roll(self, tmp_path, pipe_config):
        cfg = dataclasses.replace(pipe_config, aux_mode="none")
        store = build_params(cfg, seed=0, zero_heads=False)
        wav, mid = _example_files(tmp_path)
        audio, roll = load_example(wav, mid, cfg.n_bands)
        with_roll = reconstruct(store, cfg, audio, roll)
        shifted = np.roll(roll, 7, axis=0)
        with_other = reconstruct(store, cfg, audio, shifted)
        assert with_roll.samples.tobytes() == with_other.samples.tobytes()
