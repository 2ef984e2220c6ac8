"""Log-frequency auditory spectrogram front-end.

A fixed-shape time-frequency picture of a fixed-length clip: short Hann
frames, zero-padded FFT, a bank of triangular filters with geometrically
spaced centers, and a compressive nonlinearity.  The same front-end is applied
to the input audio and to everything the plant renders, which is all the
learning procedure needs from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .plant import AudioBuffer


@dataclass(frozen=True)
class FilterbankConfig:
    n_channels: int = 128
    f_lo: float = 110.0
    f_hi: float = 7040.0
    frames_per_clip: int = 250
    gamma: float = 1.0 / 3.0
    eps: float = 1e-8
    # FFT size for the analysis frames.  The frames themselves are short, so
    # without zero padding the DFT grid would be too coarse to give every
    # low-frequency filter a nonzero weight.
    n_fft: int = 4096
    clip_seconds: float = 2.0

    def __post_init__(self):
        if self.n_channels < 2:
            raise ConfigError("need at least 2 filterbank channels")
        if not (0.0 < self.f_lo < self.f_hi):
            raise ConfigError(f"need 0 < f_lo < f_hi, got {self.f_lo}, {self.f_hi}")
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError(f"compression exponent must be in (0, 1], got {self.gamma}")
        if self.eps <= 0:
            raise ConfigError("compression floor must be positive")
        if self.frames_per_clip < 1:
            raise ConfigError("frames_per_clip must be at least 1")
        if self.n_fft < 16:
            raise ConfigError("n_fft is too small")
        if self.clip_seconds <= 0:
            raise ConfigError("clip_seconds must be positive")


@dataclass(frozen=True)
class AuditorySpectrogram:
    """values: (n_channels, frames) nonnegative matrix, low channels = low Hz."""

    values: np.ndarray
    channel_centers: np.ndarray
    frame_hop: float  # seconds

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        c = np.asarray(self.channel_centers, dtype=np.float64)
        if v.ndim != 2 or c.ndim != 1 or v.shape[0] != c.size:
            raise ValueError(f"inconsistent spectrogram shapes {v.shape}, {c.shape}")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("spectrogram entries must be finite and nonnegative")
        if np.any(np.diff(c) <= 0):
            raise ValueError("channel centers must increase strictly")
        ratios = c[1:] / c[:-1]
        if np.max(np.abs(ratios / ratios[0] - 1.0)) > 1e-9:
            raise ValueError("channel centers must be geometrically spaced")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "channel_centers", c)


def build_filterbank(cfg: FilterbankConfig, sample_rate: int):
    """Triangular filters on the rfft grid of cfg.n_fft at the given rate.

    Returns:
        (weights, centers): weights is (n_channels, n_fft // 2 + 1) with each
        row summing to 1; centers are the geometric peak frequencies.
    """
    nyquist = sample_rate / 2.0
    if cfg.f_hi > nyquist:
        raise ConfigError(
            f"f_hi {cfg.f_hi:g} Hz exceeds Nyquist {nyquist:g} Hz at {sample_rate} Hz"
        )
    n = cfg.n_channels
    ratio = (cfg.f_hi / cfg.f_lo) ** (1.0 / (n - 1))
    centers = cfg.f_lo * ratio ** np.arange(n)
    # one virtual neighbor on each side keeps the end triangles full width
    support = np.concatenate(([cfg.f_lo / ratio], centers, [cfg.f_hi * ratio]))
    grid = np.fft.rfftfreq(cfg.n_fft, 1.0 / sample_rate)
    lo = support[:-2][:, None]
    mid = support[1:-1][:, None]
    hi = support[2:][:, None]
    rising = (grid[None, :] - lo) / (mid - lo)
    falling = (hi - grid[None, :]) / (hi - mid)
    weights = np.maximum(np.minimum(rising, falling), 0.0)
    sums = weights.sum(axis=1)
    starved = np.nonzero(sums <= 0)[0]
    if starved.size:
        raise ConfigError(
            f"filter {starved[0]} has no FFT-grid support; increase n_fft "
            f"(grid step {grid[1]:.2f} Hz)"
        )
    return weights / sums[:, None], centers


class SpectrogramFrontend:
    """Precomputed framing plus filterbank for one (config, sample rate) pair."""

    def __init__(self, cfg: FilterbankConfig, sample_rate: int):
        self.cfg = cfg
        self.sample_rate = int(sample_rate)
        self.weights, self.channel_centers = build_filterbank(cfg, sample_rate)
        self.n_samples = int(round(cfg.clip_seconds * sample_rate))
        hop = self.n_samples / cfg.frames_per_clip
        self.frame_hop = hop / sample_rate
        win = 2 * int(round(hop))
        if win > cfg.n_fft:
            raise ConfigError(f"frame window {win} exceeds n_fft {cfg.n_fft}")
        if win < 2:
            raise ConfigError("clip too short for the configured frame count")
        self.window = np.hanning(win)
        # frame t is centered at (t + 0.5) * hop; edges are zero padded
        starts = np.round((np.arange(cfg.frames_per_clip) + 0.5) * hop - win / 2).astype(int)
        idx = starts[:, None] + np.arange(win)[None, :]
        self._valid = (idx >= 0) & (idx < self.n_samples)
        self._idx = np.clip(idx, 0, self.n_samples - 1)

    def compute(self, samples) -> np.ndarray:
        """(n_channels, frames_per_clip) compressed filterbank energies."""
        x = np.asarray(samples, dtype=np.float64)
        if x.ndim != 1 or len(x) != self.n_samples:
            raise ValueError(
                f"expected exactly {self.n_samples} samples "
                f"({self.cfg.clip_seconds:g} s at {self.sample_rate} Hz), got {x.shape}"
            )
        frames = np.where(self._valid, x[self._idx], 0.0) * self.window
        spectrum = np.fft.rfft(frames, n=self.cfg.n_fft, axis=1)
        power = spectrum.real ** 2 + spectrum.imag ** 2
        energy = power @ self.weights.T  # (frames, channels)
        g, e = self.cfg.gamma, self.cfg.eps
        return ((energy + e) ** g - e ** g).T

    def __call__(self, buf) -> np.ndarray:
        if isinstance(buf, AudioBuffer):
            if buf.sample_rate != self.sample_rate:
                raise ValueError(
                    f"buffer rate {buf.sample_rate} != front-end rate {self.sample_rate}"
                )
            return self.compute(buf.samples)
        return self.compute(buf)

    def spectrogram(self, buf) -> AuditorySpectrogram:
        return AuditorySpectrogram(self(buf), self.channel_centers, self.frame_hop)

    def batch(self, buffers) -> np.ndarray:
        """Stack spectrograms of an iterable of buffers into (B, C, F)."""
        return np.stack([self(b) for b in buffers])


def compute_spectrogram(buf: AudioBuffer, cfg: FilterbankConfig) -> AuditorySpectrogram:
    """One-shot convenience wrapper around SpectrogramFrontend."""
    return SpectrogramFrontend(cfg, buf.sample_rate).spectrogram(buf)


def spectrogram_to_csv(values, path):
    """One CSV row per channel, full float64 precision."""
    np.savetxt(path, np.asarray(values, dtype=np.float64), delimiter=",", fmt="%.17g")


def spectrogram_from_csv(path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64)
    return arr if arr.ndim == 2 else arr[None, :]
