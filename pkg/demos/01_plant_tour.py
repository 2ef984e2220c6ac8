"""Tour of the built-in subtractive synthesizer.

Renders a handful of WAV files into demo_out/01_plant_tour/ so you can hear
what each control does: a reference arpeggio, then one file per parameter
family with that control pushed from one end of its range to the other.
Every control the model learns is a normalized value in [0, 1]; the plant
maps it onto the physical range printed below.
"""

from pathlib import Path

import numpy as np

from mirrornet import (MelodyParams, NoteParams, PARAM_FIELDS, ParamRanges,
                       ReferencePlant, write_wav)

OUT = Path(__file__).resolve().parent.parent / "demo_out" / "01_plant_tour"
OUT.mkdir(parents=True, exist_ok=True)

ranges = ParamRanges()
plant = ReferencePlant(ranges, sample_rate=16000, total_duration=2.0)

print("physical ranges behind the normalized controls:")
for name in PARAM_FIELDS:
    r = ranges.entry(name)
    print(f"  {name:14s} {r.lo:g} .. {r.hi:g} ({r.scale}) {r.unit}")

# A four-note arpeggio written directly as note parameters.  pitch 0.0 is
# MIDI 48; each 1/36 step in normalized pitch is one semitone.
def note(pitch, **kw):
    base = dict(pitch=pitch, duration=0.8, volume=0.85, bpf_center=0.55,
                resonance=0.3, env_attack=0.1, env_decay=0.6)
    base.update(kw)
    return NoteParams(**base)

arp = MelodyParams(notes=(note(12 / 36), note(16 / 36), note(19 / 36),
                          note(24 / 36)), total_duration=2.0)
buf = plant.render_melody(arp)
write_wav(OUT / "arpeggio.wav", buf.samples, buf.sample_rate)
print(f"\narpeggio.wav: {buf.duration:.2f} s, peak {np.abs(buf.samples).max():.3f}")

# One file per control: the same two-note figure with the control at its
# extremes, low end first.
sweeps = {
    "duration": [0.0, 1.0],      # staccato gate vs full slot
    "volume": [0.25, 1.0],
    "bpf_center": [0.1, 0.9],    # dark vs bright filter
    "resonance": [0.0, 1.0],     # gentle vs ringing
    "env_attack": [0.0, 1.0],    # click vs slow swell
    "env_decay": [0.0, 1.0],     # fast settle vs sustained transient
    "vib_intensity": [0.0, 0.6],
}
for name, (lo, hi) in sweeps.items():
    extra = {"vib_rate": 0.5, "vib_phase": 0.0} if name.startswith("vib") else {}
    melody = MelodyParams(
        notes=(note(12 / 36, **{name: lo}, **extra),
               note(12 / 36, **{name: hi}, **extra)),
        total_duration=2.0,
    )
    buf = plant.render_melody(melody)
    write_wav(OUT / f"sweep_{name}.wav", buf.samples, buf.sample_rate)
    print(f"sweep_{name}.wav: {name} {lo:.2f} then {hi:.2f}")

# The plant also accepts bare latent matrices, which is how the model drives
# it: columns are notes, rows are the 7 modeled controls.
rng = np.random.default_rng(7)
z = rng.uniform(0.2, 0.8, size=(7, 5))
buf = plant(z)
write_wav(OUT / "random_latent.wav", buf.samples, buf.sample_rate)
print(f"random_latent.wav: 5 notes from a random (7 x 5) latent")
print(f"\nwrote {len(list(OUT.glob('*.wav')))} files to {OUT}")
