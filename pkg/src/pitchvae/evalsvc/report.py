"""Objective distance reports over file pairs and listening-test score
aggregation (per-system mean with a Student-t 95 % confidence interval)."""

import os

import numpy as np
from scipy import stats

from ..data.wavio import load_wav
from ..metrics import MultiscaleConfig, multiscale_spectral_distance, spectral_distance


def _wav_stems(directory):
    stems = {}
    for name in sorted(os.listdir(directory)):
        base, ext = os.path.splitext(name)
        if ext.lower() == ".wav":
            stems[base] = os.path.join(directory, name)
    return stems


def objective_report(ref_dir, test_dir, ms_cfg=MultiscaleConfig(), window=2048):
    """Per-file and mean spectral / multiscale distances for matched stems.

    Files pair by stem (basename without extension); any stem present in only
    one directory is an error.
    """
    ref = _wav_stems(ref_dir)
    test = _wav_stems(test_dir)
    only_ref = sorted(set(ref) - set(test))
    only_test = sorted(set(test) - set(ref))
    if only_ref or only_test:
        raise ValueError(
            f"unmatched stems: reference-only {only_ref}, test-only {only_test}")
    if not ref:
        raise ValueError("no WAV pairs found")
    files = {}
    for stem in sorted(ref):
        x = load_wav(ref[stem])
        y = load_wav(test[stem])
        if len(x) != len(y):
            raise ValueError(
                f"{stem}: length mismatch {len(x)} vs {len(y)} samples")
        files[stem] = {
            "spectral": spectral_distance(x, y, window),
            "multiscale": multiscale_spectral_distance(x, y, ms_cfg),
        }
    return {
        "window": window,
        "multiscale_windows": list(ms_cfg.windows),
        "files": files,
        "mean": {
            "spectral": float(np.mean([f["spectral"] for f in files.values()])),
            "multiscale": float(np.mean([f["multiscale"] for f in files.values()])),
        },
    }


def aggregate_scores(records):
    """Per-system mean and 95 % confidence interval across all scores.

    Each record holds ``scores``: a mapping from system name to a value in
    [0, 100]; scores pool over every (listener, trial) pair. With fewer than
    two scores the CI is undefined and flagged as such.
    """
    if not records:
        raise ValueError("empty records")
    pooled = {}
    for record in records:
        for system, value in record["scores"].items():
            pooled.setdefault(system, []).append(float(value))
    out = {}
    for system in sorted(pooled):
        values = np.asarray(pooled[system])
        n = values.size
        entry = {"n": int(n), "mean": float(values.mean())}
        if n >= 2:
            sd = float(values.std(ddof=1))
            half = float(stats.t.ppf(0.975, n - 1) * sd / np.sqrt(n))
            entry["ci95"] = half
            entry["ci_defined"] = True
        else:
            entry["ci95"] = None
            entry["ci_defined"] = False
        out[system] = entry
    return out
