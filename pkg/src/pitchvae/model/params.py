"""Parameter store, initialization, and the checkpoint codec.

Checkpoints are a JSON manifest (names, shapes, dtypes, parameter groups,
byte offsets, stage flags) plus one raw little-endian binary blob; round
trips are bit-exact. No wall-clock data is written anywhere.
"""

import json
import os

import numpy as np

from ..engine import Tensor, default_dtype

# groups frozen during the adversarial stage
FROZEN_IN_STAGE2 = ("encoder", "aux_fc")


class ParamStore:
    """Ordered name -> Tensor mapping with group tags and optimizer state."""

    def __init__(self):
        self._params = {}
        self._groups = {}
        self.opt_state = {}  # name -> {"m": array, "v": array, "t": int}

    def add(self, name, data, group):
        if name in self._params:
            raise ValueError(f"duplicate parameter {name}")
        self._params[name] = Tensor(np.asarray(data, dtype=default_dtype()),
                                    requires_grad=True)
        self._groups[name] = group
        return self._params[name]

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def names(self):
        return list(self._params.keys())

    def tensors(self):
        return self._params.values()

    def items(self):
        return self._params.items()

    def group(self, name):
        return self._groups[name]

    def group_names(self, *groups):
        return [n for n in self._params if self._groups[n] in groups]

    def zero_grads(self):
        for t in self._params.values():
            t.grad = None

    def set_trainable(self, groups):
        """requires_grad on exactly the given groups (freeze the rest)."""
        for n, t in self._params.items():
            t.requires_grad = self._groups[n] in groups

    def clone_data(self, names=None):
        names = self.names() if names is None else names
        return {n: self._params[n].data.copy() for n in names}


def _kaiming_uniform(rng, shape, fan_in):
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def _conv_init(rng, store, name, group, c_out, c_in, k, zero=False):
    if zero:
        w = np.zeros((c_out, c_in, k))
    else:
        w = _kaiming_uniform(rng, (c_out, c_in, k), c_in * k)
    store.add(f"{name}.w", w, group)
    store.add(f"{name}.b", np.zeros(c_out), group)


def _tconv_init(rng, store, name, group, c_in, c_out, k):
    w = _kaiming_uniform(rng, (c_in, c_out, k), c_in * k)
    store.add(f"{name}.w", w, group)
    store.add(f"{name}.b", np.zeros(c_out), group)


def build_params(cfg, seed=0, zero_heads=True, zero_output_layers=False):
    """Initialize all parameter groups: Kaiming-uniform everywhere except the
    encoder distribution head, which starts at zero (``zero_heads``) so the
    posterior begins as the standard normal and the KL term starts at exactly
    zero.

    The decoder output and discriminator final layers must NOT start at zero
    for training: a silent reconstruction is a stationary point of the
    spectral loss (the magnitude's gradient vanishes at a zero spectrum), so
    a zeroed output layer can never move.  ``zero_output_layers`` zeroes them
    anyway for zero-propagation fixtures; gradient-check fixtures instead pass
    ``zero_heads=False`` so every parameter carries a live gradient.
    """
    rng = np.random.default_rng(seed)
    store = ParamStore()

    c_in = cfg.encoder_in_channels
    for i, c_out in enumerate(cfg.enc_channels):
        _conv_init(rng, store, f"enc.conv{i}", "encoder", c_out, c_in, cfg.enc_kernel)
        c_in = c_out
    _conv_init(rng, store, "enc.head", "encoder", 2 * cfg.latent_dim, c_in,
               cfg.head_kernel, zero=zero_heads)

    if cfg.aux_mode == "fc":
        _conv_init(rng, store, "aux.fc", "aux_fc", cfg.latent_dim,
                   cfg.latent_dim + cfg.n_notes, 1)

    dec_channels = tuple(reversed(cfg.enc_channels))
    _conv_init(rng, store, "dec.in", "decoder", dec_channels[0],
               cfg.decoder_in_channels, cfg.head_kernel)
    c_in = dec_channels[0]
    for i, c_out in enumerate(dec_channels[1:] + (dec_channels[-1],)):
        _tconv_init(rng, store, f"dec.up{i}", "decoder", c_in, c_out, cfg.dec_up_kernel)
        c_in = c_out
    _conv_init(rng, store, "dec.out", "decoder", cfg.n_bands, c_in,
               cfg.enc_kernel, zero=zero_output_layers)

    for s in range(cfg.disc_scales):
        c_in = 1
        for l, c_out in enumerate(cfg.disc_channels):
            _conv_init(rng, store, f"disc.s{s}.l{l}", "discriminator",
                       c_out, c_in, cfg.disc_kernel)
            c_in = c_out
        _conv_init(rng, store, f"disc.s{s}.l{cfg.disc_layers - 1}", "discriminator",
                   1, c_in, 3, zero=zero_output_layers)

    return store


def save_checkpoint(store, out_dir, stage=0, meta=None):
    """Write manifest.json + params.bin (parameters, then optimizer moments)."""
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    blobs = []
    offset = 0

    def put(name, arr, group, kind):
        nonlocal offset
        arr = np.ascontiguousarray(arr)
        le = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        raw = le.tobytes()
        entries.append({
            "name": name,
            "kind": kind,
            "shape": list(arr.shape),
            "dtype": np.dtype(arr.dtype).str,
            "group": group,
            "frozen_stage2": group in FROZEN_IN_STAGE2,
            "offset": offset,
            "nbytes": len(raw),
        })
        blobs.append(raw)
        offset += len(raw)

    for name, tensor in store.items():
        put(name, tensor.data, store.group(name), "param")
    for name in store.names():
        state = store.opt_state.get(name)
        if state is not None:
            put(f"{name}.adam_m", state["m"], store.group(name), "adam_m")
            put(f"{name}.adam_v", state["v"], store.group(name), "adam_v")

    manifest = {
        "format": "pitchvae-checkpoint-v1",
        "stage": stage,
        "adam_steps": {n: store.opt_state[n]["t"] for n in store.names()
                       if n in store.opt_state},
        "tensors": entries,
    }
    if meta:
        manifest["meta"] = meta
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    with open(os.path.join(out_dir, "params.bin"), "wb") as fh:
        for raw in blobs:
            fh.write(raw)


def load_checkpoint(ckpt_dir):
    """Rebuild a ParamStore (with optimizer state) from a checkpoint directory."""
    with open(os.path.join(ckpt_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    if manifest.get("format") != "pitchvae-checkpoint-v1":
        raise ValueError(f"unrecognized checkpoint format in {ckpt_dir}")
    with open(os.path.join(ckpt_dir, "params.bin"), "rb") as fh:
        blob = fh.read()

    store = ParamStore()
    arrays = {}
    for e in manifest["tensors"]:
        raw = blob[e["offset"]:e["offset"] + e["nbytes"]]
        arr = np.frombuffer(raw, dtype=np.dtype(e["dtype"])).reshape(e["shape"]).copy()
        arrays[e["name"]] = (arr, e)
        if e["kind"] == "param":
            t = store.add(e["name"], arr, e["group"])
            t.data = arr  # keep the stored dtype: round trips stay bit-exact
    for e in manifest["tensors"]:
        if e["kind"] == "adam_m":
            pname = e["name"][: -len(".adam_m")]
            state = store.opt_state.setdefault(
                pname, {"m": None, "v": None, "t": manifest["adam_steps"].get(pname, 0)})
            state["m"] = arrays[e["name"]][0]
        elif e["kind"] == "adam_v":
            pname = e["name"][: -len(".adam_v")]
            state = store.opt_state.setdefault(
                pname, {"m": None, "v": None, "t": manifest["adam_steps"].get(pname, 0)})
            state["v"] = arrays[e["name"]][0]
    return store, manifest
