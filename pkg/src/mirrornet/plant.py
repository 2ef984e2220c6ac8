"""The built-in motor plant: a deterministic subtractive melody synthesizer.

Signal chain per note: a phase-accumulating sawtooth with optional sinusoidal
pitch vibrato, shaped by a linear-attack / decay-to-sustain envelope, run
through a second-order resonant bandpass, gated to the note's duration, scaled
by the volume gain and hard-limited to [-1, 1].

The plant is intentionally not differentiable anywhere in the learning code's
sense: the training loop only ever calls it as a black box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .params import MelodyParams, NoteParams, ParamRanges, midi_to_hz

DEFAULT_SAMPLE_RATE = 16000

# Envelope floor after the decay transient, as a fraction of peak level.
ENV_SUSTAIN = 0.5


@dataclass(frozen=True)
class AudioBuffer:
    """A mono waveform plus its sample rate.  Values are nominally [-1, 1]."""

    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError(f"AudioBuffer wants a 1-D signal, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("AudioBuffer contains NaN or Inf samples")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def _render_samples(note: NoteParams, n_samples: int, sample_rate: int,
                    ranges: ParamRanges) -> np.ndarray:
    phys = ranges.physical(note.to_array())
    n = int(n_samples)
    if n <= 0:
        return np.zeros(0)
    t = np.arange(n, dtype=np.float64) / sample_rate

    # Oscillator: integrate the instantaneous frequency so vibrato bends the
    # pitch without phase jumps.  phase[0] is pinned to 0 for reproducibility.
    f0 = midi_to_hz(phys["pitch"])
    cents = phys["vib_intensity"] * np.sin(
        2.0 * np.pi * phys["vib_rate"] * t + phys["vib_phase"]
    )
    inst = f0 * np.exp2(cents / 1200.0)
    phase = np.concatenate((np.zeros(1), np.cumsum(inst[:-1]))) / sample_rate
    saw = 2.0 * (phase - np.floor(phase)) - 1.0

    # Attack ramp, then an exponential settle onto a fixed sustain plateau.
    # The plateau keeps the gate cut audible for every decay setting, so note
    # length stays observable in the spectrogram; a fully decaying envelope
    # would make short-decay notes end before the gate and erase it.
    t_a = phys["env_attack"]
    t_d = phys["env_decay"]
    settle = np.exp(-np.maximum(t - t_a, 0.0) / t_d)
    env = np.where(t < t_a, t / t_a, ENV_SUSTAIN + (1.0 - ENV_SUSTAIN) * settle)
    shaped = saw * env

    # Constant-peak-gain resonant bandpass.  The center is clamped below
    # Nyquist because the filter degenerates to silence exactly at it.
    fc = min(phys["bpf_center"], 0.49 * sample_rate)
    q = phys["resonance"]
    w0 = 2.0 * np.pi * fc / sample_rate
    alpha = np.sin(w0) / (2.0 * q)
    b = np.array([alpha, 0.0, -alpha])
    a = np.array([1.0 + alpha, -2.0 * np.cos(w0), 1.0 - alpha])
    out = lfilter(b, a, shaped)

    # Gate after filtering so the tail is exactly zero, ringing included.
    gate_n = int(round(phys["duration"] * n))
    out[gate_n:] = 0.0

    # Volume last, then a hard limiter: resonant settings can overshoot 1.
    return np.clip(out * phys["volume"], -1.0, 1.0)


def render_note(note: NoteParams, slot_duration: float, sample_rate: int,
                ranges: ParamRanges = None) -> AudioBuffer:
    """Render one note into a slot of round(slot_duration * sample_rate) samples."""
    ranges = ranges or ParamRanges()
    n = int(round(slot_duration * sample_rate))
    return AudioBuffer(sample_rate, _render_samples(note, n, sample_rate, ranges))


def render_melody(melody: MelodyParams, sample_rate: int = DEFAULT_SAMPLE_RATE,
                  ranges: ParamRanges = None) -> AudioBuffer:
    """Concatenate the melody's notes over equal slots.

    The total length is exactly round(total_duration * sample_rate); slot
    boundaries are computed on the full-length grid so no rounding drift can
    accumulate across notes.
    """
    ranges = ranges or ParamRanges()
    total = int(round(melody.total_duration * sample_rate))
    n = melody.n_notes
    bounds = [int(round(i * total / n)) for i in range(n + 1)]
    parts = [
        _render_samples(note, bounds[i + 1] - bounds[i], sample_rate, ranges)
        for i, note in enumerate(melody.notes)
    ]
    samples = np.concatenate(parts) if parts else np.zeros(0)
    assert len(samples) == total
    return AudioBuffer(sample_rate, samples)


class ReferencePlant:
    """Callable plant: a latent matrix goes in, audio comes out.

    The latent layout is (P, N) with columns as notes and P either 7 (vibrato
    defaults filled in) or 10.
    """

    def __init__(self, ranges: ParamRanges = None,
                 sample_rate: int = DEFAULT_SAMPLE_RATE,
                 total_duration: float = 2.0):
        self.ranges = ranges or ParamRanges()
        self.sample_rate = int(sample_rate)
        self.total_duration = float(total_duration)

    def render_latent(self, z) -> AudioBuffer:
        melody = MelodyParams.from_latent(z, self.total_duration)
        return render_melody(melody, self.sample_rate, self.ranges)

    def render_melody(self, melody: MelodyParams) -> AudioBuffer:
        return render_melody(melody, self.sample_rate, self.ranges)

    __call__ = render_latent
