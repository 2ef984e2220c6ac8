"""Command-line interface tying the pieces into reproducible runs.

Subcommands: gen-data, train, eval, infer, synth, spectrogram, figures.
Global flags (--profile, --config, --seed) may appear before or after the
subcommand.  Failures print a single JSON line to stderr and exit 1; usage
errors exit 2.  Every artifact a run writes embeds the config hash and seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .adapter import AdapterConfig, ExternalPlant
from .config import RunConfig, load_profile, merge_config_file
from .datasets import (generate_external_standin, generate_set1, generate_set2,
                       ingest_external, load_dataset, save_dataset)
from .errors import ConfigError, MirrorNetError
from .evaluate import evaluate, stat_tests
from .figures import emit_figures, write_pgm
from .params import MelodyParams, PARAM_NAMES
from .plant import AudioBuffer, ReferencePlant
from .spectro import SpectrogramFrontend, spectrogram_to_csv
from .training import infer_controls, infer_latents, load_trained, train
from .wavio import fit_length, read_wav, resample_linear, write_wav

log = logging.getLogger(__name__)


def _resolve_config(args) -> RunConfig:
    cfg = load_profile(getattr(args, "profile", "tiny"))
    config_path = getattr(args, "config", None)
    if config_path:
        cfg = merge_config_file(cfg, config_path)
    seed = getattr(args, "seed", None)
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    return cfg


def _plant_from(cfg: RunConfig):
    if cfg.plant.adapter_command:
        acfg = AdapterConfig(cfg.plant.adapter_command, cfg.plant.sample_rate,
                             cfg.plant.total_duration, cfg.plant.adapter_timeout)
        return ExternalPlant(acfg)
    return ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                          cfg.plant.total_duration)


def _frontend_from(cfg: RunConfig) -> SpectrogramFrontend:
    return SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)


def _load_clip(path, cfg: RunConfig) -> AudioBuffer:
    samples, sr = read_wav(path)
    if sr != cfg.plant.sample_rate:
        log.warning("%s: resampling %d Hz -> %d Hz", path, sr, cfg.plant.sample_rate)
        samples = resample_linear(samples, sr, cfg.plant.sample_rate)
    expected = int(round(cfg.plant.sample_rate * cfg.plant.total_duration))
    if len(samples) != expected:
        log.warning("%s: got %d samples, fitting to %d", path, len(samples), expected)
        samples = fit_length(samples, expected)
    return AudioBuffer(cfg.plant.sample_rate, samples)


def _read_params_csv(path) -> np.ndarray:
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if rows or lineno > 0:
                    raise ValueError(f"{path}:{lineno + 1}: non-numeric row") from None
    if not rows:
        raise ValueError(f"{path}: no parameter rows found")
    return np.array(rows, dtype=np.float64)


def _write_params_csv(path, melody: MelodyParams):
    with open(path, "w") as f:
        f.write(",".join(PARAM_NAMES) + "\n")
        for row in melody.to_array():
            f.write(",".join("%.17g" % v for v in row) + "\n")


def _dataset_dir(path, split):
    """Accept either a dataset directory itself or a parent holding splits."""
    direct = os.path.join(path, "manifest.json")
    nested = os.path.join(path, split, "manifest.json")
    if os.path.exists(nested):
        return os.path.join(path, split)
    if os.path.exists(direct):
        return path
    raise ConfigError(f"no dataset manifest under {path!r} (looked for {split!r} split)")


# ---------------------------------------------------------------------- #
# subcommands
# ---------------------------------------------------------------------- #
def cmd_gen_data(args) -> int:
    cfg = _resolve_config(args)
    frontend = _frontend_from(cfg)
    n_train = args.n_train if args.n_train is not None else cfg.data.n_train
    n_test = args.n_test if args.n_test is not None else cfg.data.n_test
    common = dict(sample_rate=cfg.plant.sample_rate,
                  total_duration=cfg.plant.total_duration,
                  n_notes=cfg.model.n_notes)
    extra = {"config_hash": cfg.hash()}
    if args.set == "external" and args.wav_dir:
        ds = ingest_external(args.wav_dir, frontend, cfg.plant.sample_rate,
                             cfg.plant.total_duration)
        save_dataset(ds, os.path.join(args.out, "test"), extra)
        print(f"ingested {len(ds)} item(s) into {args.out}/test")
        return 0
    if args.set == "set1":
        pair = generate_set1(n_train, n_test, cfg.seed, frontend,
                             ranges=cfg.plant.ranges, **common)
    elif args.set == "set2":
        pair = generate_set2(n_train, n_test, cfg.seed, frontend,
                             ranges=cfg.plant.ranges, **common)
    else:
        pair = generate_external_standin(n_train, n_test, cfg.seed, frontend, **common)
    for ds in pair:
        save_dataset(ds, os.path.join(args.out, ds.split), extra)
        print(f"wrote {len(ds)} {ds.provenance} item(s) to {args.out}/{ds.split}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    frontend = _frontend_from(cfg)
    plant = _plant_from(cfg)
    if args.data:
        ds = load_dataset(_dataset_dir(args.data, "train"))
        specs = ds.spectrograms()
    else:
        train_ds, _ = generate_set1(
            cfg.data.n_train, cfg.data.n_test, cfg.seed, frontend,
            ranges=cfg.plant.ranges, sample_rate=cfg.plant.sample_rate,
            total_duration=cfg.plant.total_duration, n_notes=cfg.model.n_notes)
        specs = train_ds.spectrograms()
    want = (cfg.spectro.n_channels, cfg.spectro.frames_per_clip)
    if specs.shape[1:] != want:
        raise ConfigError(
            f"dataset spectrograms are {specs.shape[1:]}, config wants {want}"
        )
    os.makedirs(args.out, exist_ok=True)

    def progress(it, e_c, e_d):
        print(f"iter {it + 1}/{cfg.training.outer_iters} "
              f"e_c={e_c:.6g} e_d={e_d:.6g}", file=sys.stderr, flush=True)

    state = train(cfg, specs, plant, frontend,
                  progress=progress, checkpoint_dir=args.out)
    ckpt = os.path.join(args.out, "checkpoint.bin")
    state.save(ckpt)
    state.write_log(os.path.join(args.out, "training_log.csv"))
    with open(os.path.join(args.out, "config.json"), "w") as f:
        json.dump({"config_hash": state.config_hash, "config": state.config_dict},
                  f, sort_keys=True, indent=2)
        f.write("\n")
    print(f"trained {state.outer_iters_run} outer iteration(s), "
          f"converged={state.converged}, final e_c={state.e_c_outer[-1]:.6g}, "
          f"final e_d={state.e_d_outer[-1]:.6g}")
    print(f"checkpoint: {ckpt}")
    return 0


def cmd_eval(args) -> int:
    states = [load_trained(p) for p in args.checkpoint]
    cfg = states[0].config
    plant = _plant_from(cfg)
    frontend = _frontend_from(cfg)
    train_ds = load_dataset(_dataset_dir(args.data, "train"))
    test_ds = load_dataset(_dataset_dir(args.data, "test"))
    report = evaluate(states, train_ds, test_ds, plant, frontend)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.checkpoint[0]))
    os.makedirs(out_dir, exist_ok=True)
    text = report.render_text()
    with open(os.path.join(out_dir, "report.txt"), "w") as f:
        f.write(text + "\n")
    with open(os.path.join(out_dir, "report.csv"), "w") as f:
        f.write(report.to_csv())
    print(text)
    if test_ds.has_truth():
        latents = infer_latents(states[0], test_ds.spectrograms())
        pred = np.transpose(latents, (0, 2, 1))
        stats = stat_tests(pred, test_ds.params_array(), seed=states[0].seed)
        with open(os.path.join(out_dir, "stats.txt"), "w") as f:
            f.write(stats.render_text() + "\n")
        with open(os.path.join(out_dir, "stats.csv"), "w") as f:
            f.write(stats.to_csv())
        print()
        print(stats.render_text())
    return 0


def cmd_infer(args) -> int:
    state = load_trained(args.checkpoint)
    cfg = state.config
    frontend = _frontend_from(cfg)
    plant = _plant_from(cfg)
    buf = _load_clip(args.wav, cfg)
    spec = frontend(buf)
    melody = infer_controls(state, spec)
    _write_params_csv(args.out_params, melody)
    rendered = plant.render_melody(melody)
    mse_val = float(np.mean(
        (frontend(rendered) / state.norm_constant - spec / state.norm_constant) ** 2
    ))
    if args.resynth:
        write_wav(args.resynth, rendered.samples, rendered.sample_rate)
    print(f"inferred controls for {args.wav} -> {args.out_params}")
    print(f"reconstruction spectrogram MSE (normalized): {mse_val:.6g}")
    return 0


def cmd_synth(args) -> int:
    cfg = _resolve_config(args)
    plant = _plant_from(cfg)
    mat = _read_params_csv(args.params)
    melody = MelodyParams.from_array(mat, cfg.plant.total_duration)
    buf = plant.render_melody(melody)
    write_wav(args.out, buf.samples, buf.sample_rate)
    print(f"synthesized {len(melody.notes)} note(s) -> {args.out}")
    return 0


def cmd_spectrogram(args) -> int:
    cfg = _resolve_config(args)
    frontend = _frontend_from(cfg)
    buf = _load_clip(args.wav, cfg)
    values = frontend(buf)
    spectrogram_to_csv(values, args.out_csv)
    print(f"wrote {values.shape[0]}x{values.shape[1]} spectrogram CSV to {args.out_csv}")
    if args.out_pgm:
        write_pgm(values, args.out_pgm)
        print(f"wrote image to {args.out_pgm}")
    return 0


def cmd_figures(args) -> int:
    state = load_trained(args.checkpoint)
    cfg = state.config
    plant = _plant_from(cfg)
    frontend = _frontend_from(cfg)
    ds = load_dataset(_dataset_dir(args.data, args.split))
    made = emit_figures(state, ds, plant, frontend, args.out, max_items=args.max_items)
    print(f"wrote panels for {len(made)} item(s) under {args.out}")
    return 0


# ---------------------------------------------------------------------- #
# parser
# ---------------------------------------------------------------------- #
def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's copy of these flags from overwriting a
    # value given before the subcommand; _resolve_config supplies defaults.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", default=argparse.SUPPRESS,
                        choices=("tiny", "paper"),
                        help="built-in configuration profile (default: tiny)")
    common.add_argument("--config", metavar="FILE", default=argparse.SUPPRESS,
                        help="JSON file overlaid on the profile; unknown keys are rejected")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the profile's random seed")

    ap = argparse.ArgumentParser(
        prog="mirrornet",
        description="Discover synthesizer controls from auditory spectrograms.",
        parents=[common],
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen-data", parents=[common],
                       help="generate or ingest a dataset")
    p.add_argument("--set", required=True, choices=("set1", "set2", "external"))
    p.add_argument("--out", required=True, help="output directory (train/ and test/ inside)")
    p.add_argument("--n-train", type=int, default=None)
    p.add_argument("--n-test", type=int, default=None)
    p.add_argument("--wav-dir", default=None,
                   help="with --set external: ingest these WAVs instead of the stand-in generator")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", parents=[common], help="train a model")
    p.add_argument("--data", default=None,
                   help="dataset directory (train/ split); omitted = generate a fresh seeded corpus")
    p.add_argument("--out", required=True, help="run directory for checkpoint and logs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common],
                       help="reconstruction/parameter metrics for checkpoints")
    p.add_argument("--checkpoint", action="append", required=True,
                   help="checkpoint file; repeat for mean/variance across runs")
    p.add_argument("--data", required=True, help="dataset directory with train/ and test/")
    p.add_argument("--out", default=None, help="where to write report files")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("infer", parents=[common],
                       help="WAV in, normalized parameter CSV out")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--wav", required=True)
    p.add_argument("--out-params", required=True)
    p.add_argument("--resynth", default=None, help="also render the inferred controls to WAV")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("synth", parents=[common],
                       help="normalized parameter CSV in, WAV out")
    p.add_argument("--params", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrogram", parents=[common],
                       help="WAV in, spectrogram CSV (and PGM) out")
    p.add_argument("--wav", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-pgm", default=None)
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("figures", parents=[common],
                       help="per-item spectrogram panels from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--out", required=True)
    p.add_argument("--max-items", type=int, default=None)
    p.set_defaults(func=cmd_figures)

    return ap


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MirrorNetError as e:
        print(json.dumps({"error": str(e), "type": type(e).__name__}), file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(json.dumps({"error": str(e), "type": type(e).__name__}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
