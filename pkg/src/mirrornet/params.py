"""Normalized synthesizer controls and their physical interpretation.

Every control the plant understands is a scalar in [0, 1].  The mapping from
that normalized domain to physical units (MIDI numbers, Hz, seconds, ...) is
carried by ParamRanges, so the learning side of the system never deals with
units at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError

# Column order used everywhere a parameter matrix appears (CSV files, latent
# codes, dataset arrays).  The first seven are the modeled controls; the
# vibrato triple exists so a ten-parameter corpus can still be rendered.
PARAM_FIELDS = (
    "pitch",
    "duration",
    "volume",
    "bpf_center",
    "resonance",
    "env_attack",
    "env_decay",
    "vib_rate",
    "vib_intensity",
    "vib_phase",
)

# Human-readable names, used as CSV headers and in reports.
PARAM_NAMES = (
    "MIDI note (Pitch)",
    "MIDI duration",
    "Volume",
    "Band pass filter (center frequency)",
    "Filter Resonance",
    "Envelope Attack",
    "Envelope Decay",
    "Vibrato Rate",
    "Vibrato Intensity",
    "Vibrato Phase",
)

N_PARAMS = len(PARAM_FIELDS)
N_MODELED = 7

# Normalized values substituted for the vibrato triple when only the first
# seven parameters are supplied: rate at the bottom of its range, zero depth,
# zero phase.  Depth 0 makes the other two inert.
VIBRATO_DEFAULTS = (0.0, 0.0, 0.0)


def midi_to_hz(m):
    """Equal-tempered frequency of a (real-valued) MIDI note number."""
    return 440.0 * 2.0 ** ((m - 69.0) / 12.0)


@dataclass(frozen=True)
class Range:
    """Physical range of one control: endpoints, scale law and unit."""

    lo: float
    hi: float
    scale: str = "linear"
    unit: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ConfigError("range endpoints must be finite")
        if not self.lo < self.hi:
            raise ConfigError(f"range needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown range scale {self.scale!r}")
        if self.scale == "log" and self.lo <= 0:
            raise ConfigError("logarithmic range needs lo > 0")


def denormalize(p, r: Range):
    """Map a normalized value in [0, 1] to the physical value of range `r`.

    Accepts scalars or arrays.  Linear ranges interpolate lo + p * (hi - lo);
    logarithmic ranges interpolate geometrically, lo * (hi / lo) ** p.  Both
    are monotone and hit the endpoints exactly.
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"normalized value outside [0, 1]: {p!r}")
    if r.scale == "log":
        out = r.lo * (r.hi / r.lo) ** arr
    else:
        out = r.lo + arr * (r.hi - r.lo)
    return float(out) if np.isscalar(p) or arr.ndim == 0 else out


@dataclass(frozen=True)
class ParamRanges:
    """Physical ranges for all ten controls, in PARAM_FIELDS order."""

    pitch: Range = Range(48.0, 84.0, "linear", "MIDI")
    duration: Range = Range(0.3, 1.0, "linear", "slot fraction")
    volume: Range = Range(0.0, 1.0, "linear", "gain")
    bpf_center: Range = Range(200.0, 8000.0, "log", "Hz")
    resonance: Range = Range(0.5, 10.0, "log", "Q")
    env_attack: Range = Range(0.001, 0.2, "log", "s")
    env_decay: Range = Range(0.01, 0.4, "log", "s")
    vib_rate: Range = Range(2.0, 8.0, "linear", "Hz")
    vib_intensity: Range = Range(0.0, 100.0, "linear", "cents")
    vib_phase: Range = Range(0.0, 2.0 * math.pi, "linear", "rad")

    def entry(self, name: str) -> Range:
        return getattr(self, name)

    def physical(self, values) -> dict:
        """Denormalize a length-10 vector into a dict keyed by field name."""
        vec = np.asarray(values, dtype=np.float64).ravel()
        if vec.size != N_PARAMS:
            raise ValueError(f"expected {N_PARAMS} values, got {vec.size}")
        return {
            name: denormalize(float(v), self.entry(name))
            for name, v in zip(PARAM_FIELDS, vec)
        }

    def to_dict(self) -> dict:
        return {
            f.name: {
                "lo": self.entry(f.name).lo,
                "hi": self.entry(f.name).hi,
                "scale": self.entry(f.name).scale,
                "unit": self.entry(f.name).unit,
            }
            for f in fields(self)
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ParamRanges":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown parameter range keys: {sorted(unknown)}")
        kwargs = {}
        for name, spec in d.items():
            extra = set(spec) - {"lo", "hi", "scale", "unit"}
            if extra:
                raise ConfigError(f"unknown keys in range {name!r}: {sorted(extra)}")
            kwargs[name] = Range(**spec)
        return cls(**kwargs)


def _check_unit_interval(name, value):
    v = float(value)
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return v


@dataclass(frozen=True)
class NoteParams:
    """One note's normalized controls.  Every field lives in [0, 1]."""

    pitch: float
    duration: float
    volume: float
    bpf_center: float
    resonance: float
    env_attack: float
    env_decay: float
    vib_rate: float = VIBRATO_DEFAULTS[0]
    vib_intensity: float = VIBRATO_DEFAULTS[1]
    vib_phase: float = VIBRATO_DEFAULTS[2]

    def __post_init__(self):
        for name in PARAM_FIELDS:
            object.__setattr__(self, name, _check_unit_interval(name, getattr(self, name)))

    @classmethod
    def from_array(cls, values) -> "NoteParams":
        """Build from 7 (modeled controls only) or 10 normalized values."""
        vec = np.asarray(values, dtype=np.float64).ravel()
        if vec.size == N_MODELED:
            vec = np.concatenate([vec, VIBRATO_DEFAULTS])
        elif vec.size != N_PARAMS:
            raise ValueError(
                f"expected {N_MODELED} or {N_PARAMS} values, got {vec.size}"
            )
        return cls(*(float(v) for v in vec))

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_FIELDS], dtype=np.float64)

    def modeled(self) -> np.ndarray:
        """The first seven parameters, the ones the model predicts."""
        return self.to_array()[:N_MODELED]


@dataclass(frozen=True)
class MelodyParams:
    """An ordered sequence of notes rendered back to back."""

    notes: tuple
    total_duration: float = 2.0

    def __post_init__(self):
        if len(self.notes) < 1:
            raise ValueError("a melody needs at least one note")
        if not all(isinstance(n, NoteParams) for n in self.notes):
            raise TypeError("notes must be NoteParams instances")
        if not (math.isfinite(self.total_duration) and self.total_duration > 0):
            raise ValueError(f"bad total_duration {self.total_duration!r}")
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def n_notes(self) -> int:
        return len(self.notes)

    @classmethod
    def from_array(cls, mat, total_duration: float = 2.0) -> "MelodyParams":
        """Rows are notes; 7 or 10 columns of normalized values."""
        arr = np.asarray(mat, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D note matrix, got shape {arr.shape}")
        notes = tuple(NoteParams.from_array(row) for row in arr)
        return cls(notes, total_duration)

    @classmethod
    def from_latent(cls, z, total_duration: float = 2.0) -> "MelodyParams":
        """Columns are notes (latent layout, P x N); P must be 7 or 10."""
        arr = np.asarray(z, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] not in (N_MODELED, N_PARAMS):
            raise ValueError(f"latent must be 7xN or 10xN, got shape {arr.shape}")
        return cls.from_array(arr.T, total_duration)

    def to_array(self) -> np.ndarray:
        """(N, 10) matrix of normalized values, one row per note."""
        return np.stack([n.to_array() for n in self.notes])

    def to_latent(self, n_params: int = N_MODELED) -> np.ndarray:
        """(P, N) latent layout, columns are notes."""
        if n_params not in (N_MODELED, N_PARAMS):
            raise ValueError(f"n_params must be 7 or 10, got {n_params}")
        return self.to_array().T[:n_params].copy()
