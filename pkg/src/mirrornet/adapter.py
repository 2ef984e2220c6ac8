"""Process-boundary plant: drive an external synthesizer executable.

The contract is deliberately dumb so almost anything can sit behind it: the
adapter is invoked as `<command...> <params.csv> <out.wav>`, where params.csv
holds N rows of P comma-separated normalized values (one row per note, no
header) and out.wav must come back as mono PCM WAV at the configured rate.
Rate or length mismatches are corrected with a logged warning; everything
else fails loudly.
"""

from __future__ import annotations

import logging
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass

from .errors import ConfigError, PlantError
from .params import MelodyParams
from .plant import AudioBuffer
from .wavio import fit_length, read_wav, resample_linear

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdapterConfig:
    """How to launch the external synthesizer and what to expect back."""

    command: tuple
    sample_rate: int = 16000
    total_duration: float = 2.0
    timeout: float = 120.0

    def __post_init__(self):
        if not self.command:
            raise ConfigError("adapter command must not be empty")
        object.__setattr__(self, "command", tuple(str(c) for c in self.command))

    @classmethod
    def bundled_echo(cls, sample_rate: int = 16000, total_duration: float = 2.0,
                     timeout: float = 120.0) -> "AdapterConfig":
        """An adapter that round-trips through the built-in plant in a child
        process, so the process contract can be exercised with no third-party
        synthesizer installed."""
        cmd = (
            sys.executable, "-m", "mirrornet.echo_plant",
            "--rate", str(int(sample_rate)),
            "--duration", repr(float(total_duration)),
        )
        return cls(cmd, sample_rate, total_duration, timeout)


def external_render(melody: MelodyParams, cfg: AdapterConfig) -> AudioBuffer:
    """Render a melody through the adapter process.

    Raises:
        ConfigError: the adapter executable does not exist.
        PlantError: nonzero exit, timeout, missing or malformed output WAV.
    """
    mat = melody.to_array()
    with tempfile.TemporaryDirectory(prefix="mirrornet-adapter-") as td:
        params_csv = os.path.join(td, "params.csv")
        out_wav = os.path.join(td, "out.wav")
        with open(params_csv, "w") as f:
            for row in mat:
                f.write(",".join("%.17g" % v for v in row) + "\n")
        argv = list(cfg.command) + [params_csv, out_wav]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=cfg.timeout)
        except FileNotFoundError as e:
            raise ConfigError(f"adapter executable not found: {cfg.command[0]!r}") from e
        except subprocess.TimeoutExpired as e:
            raise PlantError(
                f"adapter timed out after {cfg.timeout:g} s: {' '.join(cfg.command)}"
            ) from e
        if proc.returncode != 0:
            tail = proc.stderr.decode("utf-8", "replace").strip().splitlines()[-3:]
            raise PlantError(
                "adapter exited with status %d: %s" % (proc.returncode, " | ".join(tail) or "<no stderr>")
            )
        if not os.path.exists(out_wav):
            raise PlantError("adapter exited cleanly but wrote no output WAV")
        try:
            samples, sr = read_wav(out_wav)
        except ValueError as e:
            raise PlantError(f"adapter produced a malformed WAV: {e}") from e

    if sr != cfg.sample_rate:
        log.warning("adapter returned %d Hz audio, resampling to %d Hz", sr, cfg.sample_rate)
        samples = resample_linear(samples, sr, cfg.sample_rate)
    expected = int(round(cfg.sample_rate * cfg.total_duration))
    if len(samples) != expected:
        log.warning(
            "adapter returned %d samples, contract wants %d; %s",
            len(samples), expected,
            "truncating" if len(samples) > expected else "zero-padding",
        )
        samples = fit_length(samples, expected)
    return AudioBuffer(cfg.sample_rate, samples)


class ExternalPlant:
    """Adapter-backed counterpart of ReferencePlant (latent matrix in, audio out)."""

    def __init__(self, cfg: AdapterConfig):
        self.cfg = cfg
        self.sample_rate = cfg.sample_rate
        self.total_duration = cfg.total_duration

    def render_latent(self, z) -> AudioBuffer:
        melody = MelodyParams.from_latent(z, self.cfg.total_duration)
        return external_render(melody, self.cfg)

    def render_melody(self, melody: MelodyParams) -> AudioBuffer:
        return external_render(melody, self.cfg)

    __call__ = render_latent
