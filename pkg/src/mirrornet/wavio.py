"""Mono 16-bit PCM WAV reading and writing on the stdlib wave module.

Quantization happens only at this boundary; the rest of the pipeline stays in
float64.  Multichannel files are downmixed to mono on read.
"""

from __future__ import annotations

import wave

import numpy as np

PCM_SCALE = 32767.0


def write_wav(path, samples, sample_rate: int):
    """Write float samples (nominal [-1, 1]) as mono 16-bit PCM."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * PCM_SCALE).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate))
        w.writeframes(pcm.tobytes())


def read_wav(path):
    """Read a PCM WAV file.

    Returns:
        (samples, sample_rate) with samples float64 in [-1, 1].

    Raises:
        ValueError: not a WAV file, or not 16-bit PCM.
    """
    try:
        with wave.open(str(path), "rb") as w:
            nch = w.getnchannels()
            width = w.getsampwidth()
            sr = w.getframerate()
            raw = w.readframes(w.getnframes())
    except (wave.Error, EOFError) as e:
        raise ValueError(f"{path}: not a readable WAV file ({e})") from e
    if width != 2:
        raise ValueError(f"{path}: only 16-bit PCM is supported, got {8 * width}-bit")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / PCM_SCALE
    if nch > 1:
        data = data.reshape(-1, nch).mean(axis=1)
    return np.clip(data, -1.0, 1.0), sr


def resample_linear(x, sr_in: int, sr_out: int) -> np.ndarray:
    """Linear-interpolation resampling, good enough for ingest plumbing."""
    x = np.asarray(x, dtype=np.float64)
    if sr_in == sr_out:
        return x.copy()
    n_out = int(round(len(x) * sr_out / sr_in))
    if len(x) == 0 or n_out == 0:
        return np.zeros(n_out)
    t_out = np.arange(n_out) / sr_out
    t_in = np.arange(len(x)) / sr_in
    return np.interp(t_out, t_in, x)


def fit_length(x, n: int) -> np.ndarray:
    """Trim or zero-pad a 1-D signal to exactly n samples."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) == n:
        return x
    if len(x) > n:
        return x[:n].copy()
    return np.concatenate([x, np.zeros(n - len(x))])
