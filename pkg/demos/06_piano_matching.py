"""Sound matching against melodies the plant did not make.

The stand-in "piano" melodies carry harmonic stacks and percussive decay the
subtractive plant cannot produce exactly, so there is no ground truth to
recover, only a question of fit: drive the plant so its output sounds close.
Success metric: the spectrogram distance of plant(inferred controls) to the
target, against the same distance for random controls.

Also emits the two-panel comparison figures (input spectrogram next to the
resynthesis) into demo_out/06_piano_matching/.
"""

import dataclasses
import time
from pathlib import Path

import numpy as np

from mirrornet import (ReferencePlant, SpectrogramFrontend, emit_figures,
                       generate_external_standin, reconstruction_mse,
                       tiny_profile, train)
from mirrornet.evaluate import random_baseline_mse

OUT = Path(__file__).resolve().parent.parent / "demo_out" / "06_piano_matching"
OUT.mkdir(parents=True, exist_ok=True)

cfg = tiny_profile(seed=7)
cfg = cfg.replace(
    data=dataclasses.replace(cfg.data, n_train=16, n_test=6),
    training=dataclasses.replace(cfg.training, outer_iters=60),
)
frontend = SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)
plant = ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                       cfg.plant.total_duration)
train_ds, test_ds = generate_external_standin(
    cfg.data.n_train, cfg.data.n_test, cfg.seed, frontend,
    sample_rate=cfg.plant.sample_rate,
    total_duration=cfg.plant.total_duration, n_notes=cfg.model.n_notes)

print(f"{len(train_ds)} train / {len(test_ds)} test piano-like melodies")
t0 = time.time()
state = train(cfg, train_ds.spectrograms(), plant, frontend)
print(f"trained in {time.time() - t0:.0f} s")

model_mse = reconstruction_mse(state, test_ds, plant, frontend)
rand_mse = random_baseline_mse(test_ds, plant, frontend, state.norm_constant,
                               cfg.seed + 1, cfg.model.n_params,
                               cfg.model.n_notes)
print("per-item spectrogram MSE, model vs random controls:")
for i, (m, r) in enumerate(zip(model_mse, rand_mse)):
    mark = "<" if m < r else ">"
    print(f"  item {i}: {m:.5f} {mark} {r:.5f}")
print(f"model wins on {np.mean(model_mse < rand_mse):.0%} of items")

emit_figures(state, test_ds, plant, frontend, OUT, max_items=3)
made = sorted(p.relative_to(OUT) for p in OUT.rglob("*.pgm"))
print(f"figures: {', '.join(str(p) for p in made)}")
