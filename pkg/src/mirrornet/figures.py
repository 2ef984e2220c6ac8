"""Spectrogram panel export: portable graymaps plus CSV, per dataset item.

For items with ground truth the panel set is (a) the input, (b) the decoder
fed the true controls, (c) the decoder fed the encoder's controls, (d) the
plant driven by the encoder's controls.  External items get (a) and (d) only.
All panels of one item share a single min-max gray scale, recorded next to
the images.
"""

from __future__ import annotations

import os

import numpy as np

from .params import N_MODELED
from .spectro import spectrogram_to_csv
from .tensor import Tensor
from .training import infer_latents


def write_pgm(values, path, lo=None, hi=None):
    """8-bit binary PGM; channel 0 is drawn at the bottom of the image."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError(f"image source must be 2-D, got shape {v.shape}")
    if lo is None:
        lo = float(v.min())
    if hi is None:
        hi = float(v.max())
    span = hi - lo
    if span <= 0:
        span = 1.0
    scaled = np.clip((v - lo) / span, 0.0, 1.0)
    pixels = np.round(np.flipud(scaled) * 255.0).astype(np.uint8)
    h, w = pixels.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(pixels.tobytes())


def _decode(state, latent) -> np.ndarray:
    state.model.decoder.freeze()
    try:
        out = state.model.decoder(Tensor(latent[None])).data[0]
    finally:
        state.model.decoder.unfreeze()
    return out


def emit_figures(state, dataset, plant, frontend, out_dir, max_items=None):
    """Write per-item panel directories; returns the list of item dirs."""
    os.makedirs(out_dir, exist_ok=True)
    norm = state.norm_constant
    n_items = len(dataset) if max_items is None else min(max_items, len(dataset))
    specs = dataset.spectrograms()[:n_items]
    latents = infer_latents(state, specs)
    made = []
    for i in range(n_items):
        item_dir = os.path.join(out_dir, f"item_{i:04d}")
        os.makedirs(item_dir, exist_ok=True)
        s_norm = specs[i] / norm
        panels = {"a_input": s_norm}
        truth = dataset.items[i].params
        if truth is not None:
            true_z = truth.T[:N_MODELED]
            panels["b_decoder_true"] = _decode(state, true_z)
            panels["c_decoder_inferred"] = _decode(state, latents[i])
        panels["d_plant_inferred"] = frontend(plant(latents[i])) / norm
        lo = min(float(p.min()) for p in panels.values())
        hi = max(float(p.max()) for p in panels.values())
        for name, values in panels.items():
            write_pgm(values, os.path.join(item_dir, name + ".pgm"), lo, hi)
            spectrogram_to_csv(values, os.path.join(item_dir, name + ".csv"))
        with open(os.path.join(item_dir, "scale.txt"), "w") as f:
            f.write("lo=%.17g\nhi=%.17g\npanels=%s\nconfig_hash=%s\nseed=%d\n" % (
                lo, hi, ",".join(sorted(panels)), state.config_hash, state.seed,
            ))
        made.append(item_dir)
    return made
