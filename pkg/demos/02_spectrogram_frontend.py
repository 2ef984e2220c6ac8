"""The auditory spectrogram front-end.

Everything the model sees goes through a log-frequency triangular filterbank
with cube-root compression.  This script renders a few sounds, pushes them
through the tiny-profile front-end (32 channels x 50 frames) and writes the
results as PGM images and CSV grids into demo_out/02_spectrogram_frontend/.
"""

from pathlib import Path

import numpy as np

from mirrornet import (MelodyParams, NoteParams, ReferencePlant,
                       SpectrogramFrontend, tiny_profile, write_pgm)

OUT = Path(__file__).resolve().parent.parent / "demo_out" / "02_spectrogram_frontend"
OUT.mkdir(parents=True, exist_ok=True)

cfg = tiny_profile(0)
frontend = SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)

centers = frontend.channel_centers
print(f"{len(centers)} channels, {centers[0]:.1f} .. {centers[-1]:.1f} Hz")
ratios = centers[1:] / centers[:-1]
print(f"neighbor ratio {ratios.mean():.4f} (constant on a log axis; "
      f"spread {ratios.std():.2e})")

# A pure tone lights up one ridge; its octave lands a fixed number of
# channels higher regardless of where you start.
t = np.arange(frontend.n_samples) / cfg.plant.sample_rate
for freq in (220.0, 440.0):
    spec = frontend.compute(np.sin(2 * np.pi * freq * t))
    ridge = int(np.argmax(spec.mean(axis=1)))
    print(f"{freq:g} Hz tone -> ridge at channel {ridge}")
    write_pgm(spec, OUT / f"tone_{int(freq)}.pgm")

# A two-note melody: the gate cut between slots and the filter's brightness
# are both visible structure the model can learn from.
plant = ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                       cfg.plant.total_duration)
melody = MelodyParams(notes=(
    NoteParams(pitch=0.3, duration=0.5, volume=0.9, bpf_center=0.4,
               resonance=0.3, env_attack=0.05, env_decay=0.5),
    NoteParams(pitch=0.6, duration=1.0, volume=0.9, bpf_center=0.8,
               resonance=0.3, env_attack=0.05, env_decay=0.5),
), total_duration=2.0)
buf = plant.render_melody(melody)
spec = frontend(buf)
write_pgm(spec, OUT / "two_notes.pgm")
print(f"two_notes.pgm: shape {spec.shape}, values "
      f"{spec.min():.3f} .. {spec.max():.3f}")

# Cube-root compression keeps quiet harmonics visible: compare the dynamic
# range of raw filterbank energy against the compressed output.
quiet = plant.render_melody(MelodyParams(
    notes=(NoteParams(pitch=0.3, duration=1.0, volume=0.15, bpf_center=0.5,
                      resonance=0.0, env_attack=0.05, env_decay=0.5),),
    total_duration=2.0,
))
s_loud, s_quiet = frontend(buf), frontend(quiet)
print(f"loud/quiet peak ratio after compression: "
      f"{s_loud.max() / s_quiet.max():.2f} "
      f"(energy ratio would be ~{(s_loud.max() / s_quiet.max()) ** 3:.1f})")
print(f"\nwrote {len(list(OUT.glob('*.pgm')))} images to {OUT}")
