"""A pocket edition of the seven-parameter recovery experiment.

Melodies are generated by the plant itself from random controls, so ground
truth exists and the question becomes: after unsupervised training, do the
encoder's latents line up with the controls that actually made the sounds?
Two readouts answer it, the same ones the full evaluation uses:

* mean absolute difference (MAD) per parameter, against 1/3 for a random
  guesser on [0, 1];
* a Brown-Forsythe variance test per parameter: are the prediction errors
  tighter than a random baseline's?

The acceptance-scale run uses 60 training melodies and 150 iterations; this
demo trims both to stay around two minutes.  Report lands in
demo_out/05_set1_experiment/.
"""

import dataclasses
import time
from pathlib import Path

import numpy as np

from mirrornet import (ReferencePlant, SpectrogramFrontend, generate_set1,
                       infer_latents, reconstruction_mse, stat_tests,
                       tiny_profile, train)
from mirrornet.evaluate import random_baseline_mse

OUT = Path(__file__).resolve().parent.parent / "demo_out" / "05_set1_experiment"
OUT.mkdir(parents=True, exist_ok=True)

cfg = tiny_profile(seed=7)
cfg = cfg.replace(
    data=dataclasses.replace(cfg.data, n_train=20, n_test=8),
    training=dataclasses.replace(cfg.training, outer_iters=60),
)
frontend = SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)
plant = ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                       cfg.plant.total_duration)
train_ds, test_ds = generate_set1(cfg.data.n_train, cfg.data.n_test, cfg.seed,
                                  frontend, ranges=cfg.plant.ranges,
                                  sample_rate=cfg.plant.sample_rate,
                                  total_duration=cfg.plant.total_duration,
                                  n_notes=cfg.model.n_notes)

print(f"{len(train_ds)} train / {len(test_ds)} test melodies, "
      f"{cfg.training.outer_iters} outer iterations")
t0 = time.time()
state = train(cfg, train_ds.spectrograms(), plant, frontend)
print(f"trained in {time.time() - t0:.0f} s "
      f"(e_c {state.e_c_outer[-1]:.5f}, e_d {state.e_d_outer[-1]:.5f})")

latents = infer_latents(state, test_ds.spectrograms())
pred = np.transpose(latents, (0, 2, 1))
result = stat_tests(pred, test_ds.params_array(), seed=cfg.seed)
print()
print(result.render_text())

model_mse = reconstruction_mse(state, test_ds, plant, frontend)
rand_mse = random_baseline_mse(test_ds, plant, frontend, state.norm_constant,
                               cfg.seed + 1, cfg.model.n_params,
                               cfg.model.n_notes)
beats = float(np.mean(model_mse < rand_mse))
print(f"resynthesis beats random controls on {beats:.0%} of test melodies "
      f"(model {model_mse.mean():.5f} vs random {rand_mse.mean():.5f})")

(OUT / "stats.txt").write_text(result.render_text() + "\n")
(OUT / "stats.csv").write_text(result.to_csv())
print(f"report written to {OUT}")
