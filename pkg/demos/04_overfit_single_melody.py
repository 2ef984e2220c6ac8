"""Overfit one melody: the smallest complete training run.

One random melody goes in; the mirror has to find controls that make the
plant reproduce it.  With a single training item the decoder's babble floor
does the heavy lifting (round(rho * 1) = 0, so every babbled code is an
extra draw beyond the corpus).  Losses land in
demo_out/04_overfit_single_melody/losses.csv; run it and watch both fall.

This is a shortened cousin of the acceptance run (150 outer iterations here
against 500 there), so expect progress, not full convergence.
"""

import dataclasses
import time
from pathlib import Path

import numpy as np

from mirrornet import (PARAM_FIELDS, ReferencePlant, SpectrogramFrontend,
                       generate_set1, infer_latents, tiny_profile, train)

OUT = Path(__file__).resolve().parent.parent / "demo_out" / "04_overfit_single_melody"
OUT.mkdir(parents=True, exist_ok=True)

cfg = tiny_profile(seed=7)
cfg = cfg.replace(
    data=dataclasses.replace(cfg.data, n_train=1, n_test=1),
    training=dataclasses.replace(cfg.training, outer_iters=150, patience=10_000),
)
frontend = SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)
plant = ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                       cfg.plant.total_duration)
train_ds, _ = generate_set1(1, 1, cfg.seed, frontend, ranges=cfg.plant.ranges,
                            sample_rate=cfg.plant.sample_rate,
                            total_duration=cfg.plant.total_duration,
                            n_notes=cfg.model.n_notes)

print(f"training on one {cfg.plant.total_duration:g}-second melody, "
      f"{cfg.training.outer_iters} outer iterations")
t0 = time.time()


def progress(it, e_c, e_d):
    if (it + 1) % 25 == 0:
        print(f"  iter {it + 1:3d}: e_c={e_c:.5f} e_d={e_d:.5f}")


state = train(cfg, train_ds.spectrograms(), plant, frontend, progress=progress)
print(f"done in {time.time() - t0:.0f} s")
print(f"e_c: {state.e_c_outer[0]:.5f} -> {state.e_c_outer[-1]:.5f} "
      f"({state.e_c_outer[-1] / state.e_c_outer[0] * 100:.0f}% of start)")
print(f"e_d: {state.e_d_outer[0]:.5f} -> {state.e_d_outer[-1]:.5f} "
      f"({state.e_d_outer[-1] / state.e_d_outer[0] * 100:.0f}% of start)")

with open(OUT / "losses.csv", "w") as f:
    f.write("outer_iter,e_c,e_d\n")
    for i, (c, d) in enumerate(zip(state.e_c_outer, state.e_d_outer)):
        f.write(f"{i},{c:.17g},{d:.17g}\n")

# How close did the inferred controls get to the ones that made the melody?
z = infer_latents(state, train_ds.spectrograms())[0]
truth = train_ds.params_array()[0].T[:7]
err = np.abs(z - truth).mean(axis=1)
for name, e in zip(PARAM_FIELDS, err):
    print(f"  {name:12s} mean |pred - truth| = {e:.3f}")
print(f"losses.csv written to {OUT}")
