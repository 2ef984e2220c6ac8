"""Corpus generation and disk I/O.

Three corpus families: set1 (only the seven modeled controls vary, vibrato
pinned), set2 (all ten controls vary, so part of the signal is unmodelable),
and external (foreign audio with no ground truth, either ingested from WAV
files or produced by the bundled piano-like stand-in generator).

Every item is seeded independently from (seed, global_index), so the train and
test splits are disjoint by construction and any single item can be re-derived
without generating the rest.
"""

from __future__ import annotations

import glob
import json
import logging
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .params import (MelodyParams, N_MODELED, N_PARAMS, PARAM_NAMES,
                     VIBRATO_DEFAULTS, ParamRanges, midi_to_hz)
from .plant import AudioBuffer, render_melody
from .spectro import SpectrogramFrontend, spectrogram_from_csv, spectrogram_to_csv
from .wavio import fit_length, read_wav, resample_linear, write_wav

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


@dataclass
class DatasetItem:
    params: np.ndarray  # (N, 10) normalized ground truth, or None for external
    audio: AudioBuffer
    spectrogram: np.ndarray  # (C, F) raw values


@dataclass
class Dataset:
    provenance: str  # set1 | set2 | external
    split: str  # train | test
    seed: int
    sample_rate: int
    total_duration: float
    items: list

    def __len__(self):
        return len(self.items)

    def spectrograms(self) -> np.ndarray:
        return np.stack([it.spectrogram for it in self.items])

    def has_truth(self) -> bool:
        return all(it.params is not None for it in self.items)

    def params_array(self) -> np.ndarray:
        """(B, N, 10) ground truth; raises if any item lacks it."""
        if not self.has_truth():
            raise ValueError(f"{self.provenance} dataset has no ground-truth parameters")
        return np.stack([it.params for it in self.items])


def _item_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(index))))


def _random_params(rng, n_notes: int, n_free: int) -> np.ndarray:
    base = np.concatenate([np.zeros(N_MODELED), VIBRATO_DEFAULTS])
    mat = np.tile(base, (n_notes, 1))
    mat[:, :n_free] = rng.uniform(size=(n_notes, n_free))
    return mat


def _generate_plant_set(provenance, n_free, n_train, n_test, seed, ranges,
                        sample_rate, total_duration, n_notes, frontend):
    def build(split, lo, hi):
        items = []
        for i in range(lo, hi):
            rng = _item_rng(seed, i)
            mat = _random_params(rng, n_notes, n_free)
            melody = MelodyParams.from_array(mat, total_duration)
            buf = render_melody(melody, sample_rate, ranges)
            items.append(DatasetItem(mat, buf, frontend(buf)))
        return Dataset(provenance, split, seed, sample_rate, total_duration, items)

    return (build("train", 0, n_train),
            build("test", n_train, n_train + n_test))


def generate_set1(n_train, n_test, seed, frontend: SpectrogramFrontend,
                  ranges: ParamRanges = None, sample_rate: int = 16000,
                  total_duration: float = 2.0, n_notes: int = 5):
    """Uniform draws of the seven modeled controls; vibrato pinned at its
    documented defaults.  Returns a (train, test) pair."""
    return _generate_plant_set("set1", N_MODELED, n_train, n_test, seed,
                               ranges or ParamRanges(), sample_rate,
                               total_duration, n_notes, frontend)


def generate_set2(n_train, n_test, seed, frontend: SpectrogramFrontend,
                  ranges: ParamRanges = None, sample_rate: int = 16000,
                  total_duration: float = 2.0, n_notes: int = 5):
    """All ten controls drawn uniformly; the model still only predicts seven."""
    return _generate_plant_set("set2", N_PARAMS, n_train, n_test, seed,
                               ranges or ParamRanges(), sample_rate,
                               total_duration, n_notes, frontend)


# ---------------------------------------------------------------------- #
# external corpora
# ---------------------------------------------------------------------- #
def piano_like_melody(rng, n_notes: int, total_duration: float,
                      sample_rate: int) -> np.ndarray:
    """A stand-in for a sampled piano corpus: additive decaying harmonics.

    Integer MIDI pitches, a sharp attack, per-partial exponential decay that
    falls off faster for higher partials.  Nothing here is meant to fool an
    ear; it only has to be foreign audio with note structure the plant can
    plausibly imitate.
    """
    total = int(round(total_duration * sample_rate))
    bounds = [int(round(i * total / n_notes)) for i in range(n_notes + 1)]
    out = np.zeros(total)
    for i in range(n_notes):
        n = bounds[i + 1] - bounds[i]
        t = np.arange(n) / sample_rate
        midi = rng.integers(48, 85)
        vel = rng.uniform(0.4, 1.0)
        f0 = midi_to_hz(float(midi))
        decay0 = rng.uniform(0.25, 0.5) * (n / sample_rate)
        note = np.zeros(n)
        for k in range(1, 9):
            fk = k * f0
            if fk >= 0.45 * sample_rate:
                break
            phase = rng.uniform(0.0, 2.0 * np.pi)
            note += (k ** -1.3) * np.sin(2.0 * np.pi * fk * t + phase) \
                * np.exp(-t / (decay0 / k ** 0.7))
        attack = np.minimum(t / 0.003, 1.0)
        note *= attack
        peak = np.max(np.abs(note))
        if peak > 0:
            note *= 0.9 * vel / peak
        out[bounds[i]:bounds[i + 1]] = note
    return out


def generate_external_standin(n_train, n_test, seed, frontend: SpectrogramFrontend,
                              sample_rate: int = 16000, total_duration: float = 2.0,
                              n_notes: int = 5):
    """Piano-like corpus with no ground-truth parameters attached."""
    def build(split, lo, hi):
        items = []
        for i in range(lo, hi):
            rng = _item_rng(seed, i)
            samples = piano_like_melody(rng, n_notes, total_duration, sample_rate)
            buf = AudioBuffer(sample_rate, samples)
            items.append(DatasetItem(None, buf, frontend(buf)))
        return Dataset("external", split, seed, sample_rate, total_duration, items)

    return (build("train", 0, n_train),
            build("test", n_train, n_train + n_test))


def ingest_external(wav_dir, frontend: SpectrogramFrontend, sample_rate: int = 16000,
                    total_duration: float = 2.0, split: str = "test") -> Dataset:
    """Read a directory of WAV files into an external dataset.

    Files are resampled to the configured rate and trimmed or zero-padded to
    the clip length, each with a logged warning.  Unreadable files are skipped
    with a warning; an empty result is an error.
    """
    paths = sorted(glob.glob(os.path.join(str(wav_dir), "*.wav")))
    expected = int(round(sample_rate * total_duration))
    items = []
    for path in paths:
        try:
            samples, sr = read_wav(path)
        except ValueError as e:
            log.warning("skipping unreadable file: %s", e)
            continue
        if sr != sample_rate:
            log.warning("%s: resampling %d Hz -> %d Hz", path, sr, sample_rate)
            samples = resample_linear(samples, sr, sample_rate)
        if len(samples) != expected:
            log.warning("%s: got %d samples, fitting to %d", path, len(samples), expected)
            samples = fit_length(samples, expected)
        buf = AudioBuffer(sample_rate, samples)
        items.append(DatasetItem(None, buf, frontend(buf)))
    if not items:
        raise ConfigError(f"no usable WAV files in {wav_dir!r}")
    return Dataset("external", split, 0, sample_rate, total_duration, items)


# ---------------------------------------------------------------------- #
# disk layout: manifest.json, params.csv, item_XXXX.wav, spec_XXXX.csv
# ---------------------------------------------------------------------- #
def save_dataset(ds: Dataset, out_dir, extra_manifest: dict = None):
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "provenance": ds.provenance,
        "split": ds.split,
        "seed": ds.seed,
        "n_items": len(ds),
        "sample_rate": ds.sample_rate,
        "total_duration": ds.total_duration,
        "param_names": list(PARAM_NAMES),
        "vibrato_defaults": list(VIBRATO_DEFAULTS),
        "has_truth": ds.has_truth(),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    with open(os.path.join(out_dir, MANIFEST_NAME), "w") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")
    if ds.has_truth():
        with open(os.path.join(out_dir, "params.csv"), "w") as f:
            f.write("melody,note," + ",".join(PARAM_NAMES) + "\n")
            for i, item in enumerate(ds.items):
                for j, row in enumerate(item.params):
                    f.write("%d,%d," % (i, j))
                    f.write(",".join("%.17g" % v for v in row) + "\n")
    for i, item in enumerate(ds.items):
        write_wav(os.path.join(out_dir, f"item_{i:04d}.wav"),
                  item.audio.samples, item.audio.sample_rate)
        spectrogram_to_csv(item.spectrogram, os.path.join(out_dir, f"spec_{i:04d}.csv"))


def load_dataset(in_dir) -> Dataset:
    manifest_path = os.path.join(str(in_dir), MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise ConfigError(f"{in_dir!r} is not a dataset directory (no {MANIFEST_NAME})")
    with open(manifest_path) as f:
        manifest = json.load(f)
    n = int(manifest["n_items"])
    params = None
    if manifest.get("has_truth"):
        rows = np.loadtxt(os.path.join(in_dir, "params.csv"),
                          delimiter=",", skiprows=1, dtype=np.float64, ndmin=2)
        params = rows[:, 2:].reshape(n, -1, N_PARAMS)
    items = []
    for i in range(n):
        samples, sr = read_wav(os.path.join(in_dir, f"item_{i:04d}.wav"))
        spec = spectrogram_from_csv(os.path.join(in_dir, f"spec_{i:04d}.csv"))
        items.append(DatasetItem(
            params[i] if params is not None else None,
            AudioBuffer(sr, samples),
            spec,
        ))
    return Dataset(manifest["provenance"], manifest["split"], int(manifest["seed"]),
                   int(manifest["sample_rate"]), float(manifest["total_duration"]),
                   items)
