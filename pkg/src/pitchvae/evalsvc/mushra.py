"""Blinded multi-stimulus listening-session construction.

Every trial gets a hidden copy of the reference and a 1 kHz high-passed
anchor alongside the system outputs; presentation order is a seeded shuffle
and labels are opaque tokens. The unblinded mapping lives only in the audit
structure, which the service never exposes over HTTP.
"""

import os

import numpy as np

from ..data.wavio import load_wav, save_wav
from ..dsp.filters import make_anchor

ROLE_SYSTEM = "system"
ROLE_HIDDEN_REFERENCE = "hidden_reference"
ROLE_ANCHOR = "anchor"
ROLE_REFERENCE = "reference"


def build_session(manifest, seed, out_dir):
    """Build a blinded session plus its unblinded audit mapping.

    ``manifest``: {"session_id"?, "listener"?, "trials": [{"id", "reference":
    wav path, "systems": {name: wav path}}]}. Anchor WAVs are rendered into
    ``out_dir``. Returns (session, audit); both are JSON-serializable.
    """
    trials = manifest.get("trials")
    if not trials:
        raise ValueError("manifest has no trials")
    os.makedirs(out_dir, exist_ok=True)
    session_id = manifest.get("session_id", f"mushra-{seed}")
    session = {"session_id": session_id,
               "listener": manifest.get("listener", "anonymous"),
               "trials": []}
    audit = {"session_id": session_id, "seed": seed, "stimuli": {}}

    for index, trial in enumerate(trials):
        trial_id = str(trial.get("id", f"trial-{index:02d}"))
        reference_path = trial.get("reference")
        if not reference_path:
            raise ValueError(f"trial {trial_id}: missing reference")
        systems = trial.get("systems") or {}
        if not systems:
            raise ValueError(f"trial {trial_id}: needs at least one system output")

        anchor_path = os.path.join(out_dir, f"anchor-{index:02d}.wav")
        save_wav(anchor_path, make_anchor(load_wav(reference_path)))

        entries = [(ROLE_SYSTEM, name, path) for name, path in sorted(systems.items())]
        entries.append((ROLE_HIDDEN_REFERENCE, None, reference_path))
        entries.append((ROLE_ANCHOR, None, anchor_path))

        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        order = rng.permutation(len(entries))

        ref_stimulus = f"{trial_id}:REF"
        audit["stimuli"][ref_stimulus] = {
            "trial": trial_id, "label": "REF", "role": ROLE_REFERENCE,
            "system": None, "path": os.path.abspath(reference_path)}
        stimuli = []
        for position, entry_index in enumerate(order):
            role, system, path = entries[entry_index]
            label = f"S{position + 1}"
            stimulus_id = f"{trial_id}:{label}"
            stimuli.append({"label": label, "stimulus": stimulus_id})
            audit["stimuli"][stimulus_id] = {
                "trial": trial_id, "label": label, "role": role,
                "system": system, "path": os.path.abspath(path)}
        session["trials"].append({
            "id": trial_id,
            "reference": {"stimulus": ref_stimulus},
            "stimuli": stimuli,
        })
    return session, audit
