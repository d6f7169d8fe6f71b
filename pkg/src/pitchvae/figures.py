"""Matplotlib renderers for the standard report figures: training distance
curves, per-system listening scores with confidence intervals, and
spectrogram images. All figures render to files (Agg backend, no display)."""

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def read_metric_log(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def plot_training_curves(records, out_path):
    """Train vs. held-out multiscale distance over steps, stages marked."""
    if not records:
        raise ValueError("empty metric log")
    steps = [r["step"] for r in records]
    train = [r["d_ms"] for r in records]
    val = [r["val_distance"] for r in records]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, train, label="train", color="tab:blue")
    label = "validation (= train clip)" if records[0].get("val_is_train") \
        else "validation"
    ax.plot(steps, val, label=label, color="tab:orange", linestyle="--")
    boundaries = [r["step"] for i, r in enumerate(records[:-1])
                  if records[i + 1]["stage"] != r["stage"]]
    for b in boundaries:
        ax.axvline(b, color="gray", linewidth=0.8, linestyle=":")
    ax.set_xlabel("step")
    ax.set_ylabel("multiscale spectral distance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_score_chart(report, out_path):
    """Bar chart of per-system mean scores with 95 % CI error bars."""
    systems = report.get("systems") or {}
    if not systems:
        raise ValueError("report has no systems")
    names = sorted(systems)
    means = [systems[n]["mean"] for n in names]
    errors = [systems[n]["ci95"] if systems[n].get("ci_defined") else 0.0
              for n in names]
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(names), 4))
    ax.bar(np.arange(len(names)), means, yerr=errors, capsize=4,
           color="tab:blue")
    ax.set_xticks(np.arange(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylim(0, 100)
    ax.set_ylabel("score")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path


def plot_spectrogram(spec, out_path):
    """Render a Spectrogram (dB grid) to an image file."""
    fig, ax = plt.subplots(figsize=(7, 4))
    extent = [float(spec.times_s[0]), float(spec.times_s[-1]),
              float(spec.freqs_hz[0]), float(spec.freqs_hz[-1])]
    image = ax.imshow(spec.db, origin="lower", aspect="auto", extent=extent,
                      cmap="magma")
    fig.colorbar(image, ax=ax, label="dB")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("frequency [Hz]")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
    return out_path
