"""Command-line entry point.

Every command resolves its configuration (JSON file plus flag overrides),
writes the resolved snapshot alongside its outputs, and exits with:
  0 success | 1 usage error | 2 data error | 3 numerical failure
"""

import argparse
import dataclasses
import json
import os
import sys

from .data.dataset import make_dataset
from .data.wavio import load_wav, save_wav
from .dsp.filters import make_anchor
from .evalsvc.mushra import build_session
from .evalsvc.report import aggregate_scores, objective_report
from .evalsvc.server import serve
from .evalsvc.spectrogram import export_spectrogram, write_spectrogram_csv
from .figures import (
    plot_score_chart,
    plot_spectrogram,
    plot_training_curves,
    read_metric_log,
)
from .metrics import (
    MultiscaleConfig,
    TOY_MULTISCALE,
    multiscale_spectral_distance,
    spectral_distance,
)
from .model import ModelConfig, TOY_CONFIG, load_checkpoint
from .pipeline import load_example, reconstruct
from .training import NumericalError, TrainConfig, train_two_stage

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# --------------------------------------------------------------- config


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _tuplify(value):
    return tuple(value) if isinstance(value, list) else value


def _model_config(section):
    fields = {f.name: getattr(TOY_CONFIG, f.name)
              for f in dataclasses.fields(ModelConfig)}
    for key, value in (section or {}).items():
        if key not in fields:
            raise ValueError(f"unknown model config key {key!r}")
        fields[key] = _tuplify(value)
    return ModelConfig(**fields)


def _train_config(section, args):
    fields = {f.name: getattr(TrainConfig(), f.name)
              for f in dataclasses.fields(TrainConfig)}
    for key, value in (section or {}).items():
        if key not in fields:
            raise ValueError(f"unknown train config key {key!r}")
        fields[key] = value
    for key in fields:
        override = getattr(args, key, None)
        if override is not None:
            fields[key] = override
    return TrainConfig(**fields)


def _multiscale_config(section=None, windows=None):
    if windows:
        return MultiscaleConfig(windows=tuple(windows))
    if section and "windows" in section:
        return MultiscaleConfig(windows=tuple(section["windows"]),
                                eps_power=section.get("eps_power", 1e-7),
                                eps_log=section.get("eps_log", 1e-7))
    return TOY_MULTISCALE


def _write_snapshot(target, payload):
    """Resolved-config snapshot next to the command's outputs."""
    if os.path.isdir(target):
        path = os.path.join(target, "config.json")
    else:
        path = target + ".config.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    return path


def _emit(obj):
    print(json.dumps(obj, indent=1, sort_keys=True))


# -------------------------------------------------------------- commands


def cmd_train(args):
    base = _load_json(args.config) if args.config else {}
    train_cfg = _train_config(base.get("train"), args)
    model_cfg = _model_config(base.get("model"))
    ms_cfg = _multiscale_config(base.get("multiscale"))
    os.makedirs(args.out, exist_ok=True)
    _write_snapshot(args.out, {
        "command": "train",
        "audio_dir": args.audio, "midi_dir": args.midi, "out": args.out,
        "train": dataclasses.asdict(train_cfg),
        "model": dataclasses.asdict(model_cfg),
        "multiscale": dataclasses.asdict(ms_cfg),
    })
    dataset = make_dataset(args.audio, args.midi, n_bands=model_cfg.n_bands,
                           seed=train_cfg.seed,
                           val_fraction=train_cfg.val_fraction)
    summary = train_two_stage(dataset, train_cfg, model_cfg, args.out, ms_cfg)
    records = read_metric_log(summary["log"])
    if records:
        summary["curves"] = plot_training_curves(
            records, os.path.join(args.out, "training-curves.png"))
    _emit(summary)
    return EXIT_OK


def cmd_reconstruct(args):
    store, manifest = load_checkpoint(args.ckpt)
    meta = manifest.get("meta") or {}
    if "model" not in meta:
        raise ValueError(f"checkpoint {args.ckpt} lacks a model config")
    model_cfg = _model_config(meta["model"])
    audio, roll = load_example(args.in_wav, args.in_midi, model_cfg.n_bands)
    out = reconstruct(store, model_cfg, audio, roll,
                      seed=args.seed if args.sample else None)
    save_wav(args.out_wav, out)
    _write_snapshot(args.out_wav, {
        "command": "reconstruct", "ckpt": args.ckpt,
        "in_wav": args.in_wav, "in_midi": args.in_midi,
        "out_wav": args.out_wav, "sample": args.sample, "seed": args.seed,
        "model": dataclasses.asdict(model_cfg),
    })
    _emit({"out_wav": args.out_wav, "samples": len(out)})
    return EXIT_OK


def cmd_eval(args):
    x = load_wav(args.ref)
    y = load_wav(args.test)
    ms_cfg = _multiscale_config(windows=args.ms_windows)
    result = {
        "spectral": spectral_distance(x, y, args.window),
        "multiscale": multiscale_spectral_distance(x, y, ms_cfg),
        "window": args.window,
        "multiscale_windows": list(ms_cfg.windows),
    }
    _emit(result)
    return EXIT_OK


def cmd_anchor(args):
    save_wav(args.out_wav, make_anchor(load_wav(args.in_wav)))
    _write_snapshot(args.out_wav, {
        "command": "anchor", "in_wav": args.in_wav, "out_wav": args.out_wav})
    _emit({"out_wav": args.out_wav})
    return EXIT_OK


def cmd_spectrogram(args):
    spec = export_spectrogram(load_wav(args.in_wav), args.window)
    write_spectrogram_csv(spec, args.out_csv)
    outputs = {"out_csv": args.out_csv,
               "shape": [int(s) for s in spec.db.shape]}
    if args.out_png:
        outputs["out_png"] = plot_spectrogram(spec, args.out_png)
    _write_snapshot(args.out_csv, {
        "command": "spectrogram", "in_wav": args.in_wav,
        "window": args.window, "out_csv": args.out_csv,
        "out_png": args.out_png})
    _emit(outputs)
    return EXIT_OK


def cmd_objective_report(args):
    ms_cfg = _multiscale_config(windows=args.ms_windows)
    report = objective_report(args.ref_dir, args.test_dir, ms_cfg, args.window)
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "objective.json")
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    csv_path = os.path.join(args.out, "objective.csv")
    with open(csv_path, "w") as fh:
        fh.write("stem,spectral,multiscale\n")
        for stem in sorted(report["files"]):
            entry = report["files"][stem]
            fh.write(f"{stem},{entry['spectral']:.9g},{entry['multiscale']:.9g}\n")
        fh.write(f"mean,{report['mean']['spectral']:.9g},"
                 f"{report['mean']['multiscale']:.9g}\n")
    _write_snapshot(args.out, {
        "command": "objective-report", "ref_dir": args.ref_dir,
        "test_dir": args.test_dir, "window": args.window,
        "multiscale_windows": list(ms_cfg.windows), "out": args.out})
    _emit({"json": json_path, "csv": csv_path, "mean": report["mean"]})
    return EXIT_OK


def cmd_build_session(args):
    manifest = _load_json(args.stimuli)
    session, audit = build_session(manifest, args.seed, args.out)
    with open(os.path.join(args.out, "session.json"), "w") as fh:
        json.dump(session, fh, indent=1, sort_keys=True)
    with open(os.path.join(args.out, "audit.json"), "w") as fh:
        json.dump(audit, fh, indent=1, sort_keys=True)
    _write_snapshot(args.out, {
        "command": "build-session", "stimuli": args.stimuli,
        "seed": args.seed, "out": args.out})
    _emit({"session_id": session["session_id"],
           "trials": len(session["trials"]),
           "out": args.out})
    return EXIT_OK


def cmd_serve_mushra(args):
    session = _load_json(os.path.join(args.session, "session.json"))
    audit = _load_json(os.path.join(args.session, "audit.json"))
    server = serve(session, audit, args.ratings, port=args.port, host=args.host)
    host, port = server.server_address[:2]
    print(f"serving session {session['session_id']} on http://{host}:{port}",
          file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _unblind_records(records, audit):
    out = []
    for record in records:
        scores = {}
        for label, value in record["scores"].items():
            entry = audit["stimuli"][f"{record['trial']}:{label}"]
            key = entry["system"] if entry["role"] == "system" else entry["role"]
            scores[key] = value
        out.append({"listener": record["listener"], "trial": record["trial"],
                    "scores": scores})
    return out


def cmd_report(args):
    with open(args.ratings) as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    if args.audit:
        records = _unblind_records(records, _load_json(args.audit))
    report = {"n_records": len(records), "systems": aggregate_scores(records)}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        json_path = os.path.join(args.out, "report.json")
        with open(json_path, "w") as fh:
            json.dump(report, fh, indent=1, sort_keys=True)
        csv_path = os.path.join(args.out, "report.csv")
        with open(csv_path, "w") as fh:
            fh.write("system,n,mean,ci95\n")
            for name in sorted(report["systems"]):
                entry = report["systems"][name]
                ci = "" if entry["ci95"] is None else f"{entry['ci95']:.9g}"
                fh.write(f"{name},{entry['n']},{entry['mean']:.9g},{ci}\n")
        chart_path = plot_score_chart(
            report, os.path.join(args.out, "scores.png"))
        _write_snapshot(args.out, {
            "command": "report", "ratings": args.ratings,
            "audit": args.audit, "out": args.out})
        report = dict(report, json=json_path, csv=csv_path, chart=chart_path)
    _emit(report)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _build_parser():
    parser = _Parser(prog="pitchvae",
                     description="Pitch-conditioned subband autoencoder tools")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("train", help="run two-stage training")
    p.add_argument("--audio", required=True, help="directory of WAV files")
    p.add_argument("--midi", required=True, help="directory of MIDI files")
    p.add_argument("--out", required=True, help="run directory")
    p.add_argument("--config", help="JSON config file")
    for flag, kind in [("--stage1-steps", int), ("--stage2-steps", int),
                       ("--seed", int), ("--batch-size", int),
                       ("--crop-len", int), ("--log-every", int),
                       ("--lr", float), ("--beta", float)]:
        p.add_argument(flag, type=kind)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("reconstruct", help="run a checkpoint over one clip")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in-wav", required=True)
    p.add_argument("--in-midi", required=True,
                   help="note roll source (required: synthesis is pitch-conditioned)")
    p.add_argument("--out-wav", required=True)
    p.add_argument("--sample", action="store_true",
                   help="sample the latent instead of using the posterior mean")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="distances between two WAV files")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--window", type=int, default=2048)
    p.add_argument("--ms-windows", type=lambda s: [int(w) for w in s.split(",")])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("anchor", help="render the 1 kHz high-passed anchor")
    p.add_argument("--in-wav", required=True)
    p.add_argument("--out-wav", required=True)
    p.set_defaults(func=cmd_anchor)

    p = sub.add_parser("spectrogram", help="export a dB spectrogram")
    p.add_argument("--in-wav", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-png")
    p.add_argument("--window", type=int, default=1024)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("objective-report",
                       help="per-file distances over matched directories")
    p.add_argument("--ref-dir", required=True)
    p.add_argument("--test-dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=2048)
    p.add_argument("--ms-windows", type=lambda s: [int(w) for w in s.split(",")])
    p.set_defaults(func=cmd_objective_report)

    p = sub.add_parser("build-session", help="build a blinded listening session")
    p.add_argument("--stimuli", required=True, help="manifest JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_session)

    p = sub.add_parser("serve-mushra", help="serve a built session over HTTP")
    p.add_argument("--session", required=True,
                   help="directory holding session.json and audit.json")
    p.add_argument("--ratings", required=True, help="JSONL ratings store")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve_mushra)

    p = sub.add_parser("report", help="aggregate ratings into scores")
    p.add_argument("--ratings", required=True)
    p.add_argument("--audit", help="audit JSON for unblinding labels")
    p.add_argument("--out", help="directory for report.json/.csv and chart")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse help/usage paths exit; surface them as return codes so
        # in-process callers get the same contract as the shell
        return int(exc.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
