"""Encoder and decoder topology.

The encoder squeezes a (channels, frames) spectrogram down to a (P, N) latent
through pointwise convolutions, a dilated convolution block, and a pooling
head whose windows multiply out exactly to frames / notes.  The decoder is the
mirror image: upsample, pointwise convolutions, the same dilated block shape,
and a linear output layer.  A sigmoid pins the latent into [0, 1] so every
code is a valid plant control matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .nn import Conv1d, Module
from .tensor import Tensor, avg_pool1d, relu, sigmoid, upsample1d


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


@dataclass(frozen=True)
class ModelConfig:
    """Widths and windows of the whole autoencoder.

    pre_filters are the three pointwise stages next to the spectrogram (the
    decoder mirrors them in reverse), head_filters the two stages next to the
    latent, and the dilated block runs at pre_filters[-1] channels on both
    sides.  The first pre filter width must equal the spectrogram channel
    count because the mirrored output layer produces exactly that many rows.
    """

    n_params: int = 7
    n_notes: int = 5
    n_channels: int = 128
    n_frames: int = 250
    pre_filters: tuple = (128, 256, 256)
    head_filters: tuple = (256, 128)
    dilations: tuple = (1, 4, 16)
    dilated_kernel: int = 3
    pools: tuple = (5, 5, 2)
    upsamples: tuple = (2, 5, 5)

    def __post_init__(self):
        for name, want in (("pre_filters", 3), ("head_filters", 2),
                           ("dilations", 3), ("pools", 3), ("upsamples", 3)):
            val = getattr(self, name)
            object.__setattr__(self, name, tuple(int(v) for v in val))
            if len(getattr(self, name)) != want:
                raise ConfigError(f"{name} needs exactly {want} entries, got {val!r}")
        if self.n_params < 1 or self.n_notes < 1:
            raise ConfigError("n_params and n_notes must be positive")
        if self.pre_filters[0] != self.n_channels:
            raise ConfigError(
                f"pre_filters[0] ({self.pre_filters[0]}) must equal the "
                f"spectrogram channel count ({self.n_channels})"
            )
        if self.n_notes * _prod(self.pools) != self.n_frames:
            raise ConfigError(
                f"pooling chain {self.pools} maps {self.n_frames} frames to "
                f"{self.n_frames / _prod(self.pools):g}, not n_notes={self.n_notes}"
            )
        if self.n_notes * _prod(self.upsamples) != self.n_frames:
            raise ConfigError(
                f"upsampling chain {self.upsamples} maps {self.n_notes} notes to "
                f"{self.n_notes * _prod(self.upsamples)}, not n_frames={self.n_frames}"
            )
        if self.dilated_kernel != 3:
            raise ConfigError("the dilated block uses kernel size 3")

    @property
    def latent_shape(self):
        return (self.n_params, self.n_notes)


PAPER_MODEL = ModelConfig()

TINY_MODEL = ModelConfig(
    n_params=7,
    n_notes=2,
    n_channels=32,
    n_frames=50,
    pre_filters=(32, 64, 64),
    head_filters=(64, 32),
    pools=(5, 5, 1),
    upsamples=(1, 5, 5),
)


def _named(prefix, layers):
    out = []
    for lname, layer in layers:
        for pname, p in layer.named_parameters():
            out.append((f"{prefix}{lname}.{pname}", p))
    return out


class Encoder(Module):
    """Spectrogram (B, channels, frames) -> latent (B, P, N) in (0, 1)."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        pre, head = cfg.pre_filters, cfg.head_filters
        self.c1 = Conv1d(cfg.n_channels, pre[0], 1, rng=rng)
        self.c2 = Conv1d(pre[0], pre[1], 1, rng=rng)
        self.c3 = Conv1d(pre[1], pre[2], 1, rng=rng)
        self.d1 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[0], rng=rng)
        self.d2 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[1], rng=rng)
        self.d3 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[2], rng=rng)
        self.c4 = Conv1d(pre[2], head[0], 1, rng=rng)
        self.c5 = Conv1d(head[0], head[1], 1, rng=rng)
        self.c6 = Conv1d(head[1], cfg.n_params, 1, rng=rng)
        self._layers = [("c1", self.c1), ("c2", self.c2), ("c3", self.c3),
                        ("d1", self.d1), ("d2", self.d2), ("d3", self.d3),
                        ("c4", self.c4), ("c5", self.c5), ("c6", self.c6)]

    def named_parameters(self):
        return _named("", self._layers)

    def __call__(self, x: Tensor, trace: list = None) -> Tensor:
        def t(name, v):
            if trace is not None:
                trace.append((name, v.shape))
        x = relu(self.c1(x)); t("c1", x)
        x = relu(self.c2(x)); t("c2", x)
        x = relu(self.c3(x)); t("c3", x)
        x = relu(self.d1(x)); t("d1", x)
        x = relu(self.d2(x)); t("d2", x)
        x = relu(self.d3(x)); t("d3", x)
        x = avg_pool1d(relu(self.c4(x)), self.cfg.pools[0]); t("c4_pool", x)
        x = avg_pool1d(relu(self.c5(x)), self.cfg.pools[1]); t("c5_pool", x)
        x = avg_pool1d(self.c6(x), self.cfg.pools[2]); t("c6_pool", x)
        x = sigmoid(x); t("latent", x)
        return x


class Decoder(Module):
    """Latent (B, P, N) -> spectrogram estimate (B, channels, frames), linear output."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        pre, head = cfg.pre_filters, cfg.head_filters
        self.c7 = Conv1d(cfg.n_params, head[1], 1, rng=rng)
        self.c8 = Conv1d(head[1], head[0], 1, rng=rng)
        self.c9 = Conv1d(head[0], pre[2], 1, rng=rng)
        self.d1 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[0], rng=rng)
        self.d2 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[1], rng=rng)
        self.d3 = Conv1d(pre[2], pre[2], 3, dilation=cfg.dilations[2], rng=rng)
        self.c10 = Conv1d(pre[2], pre[2], 1, rng=rng)
        self.c11 = Conv1d(pre[2], pre[1], 1, rng=rng)
        self.c12 = Conv1d(pre[1], cfg.n_channels, 1, rng=rng)
        self._layers = [("c7", self.c7), ("c8", self.c8), ("c9", self.c9),
                        ("d1", self.d1), ("d2", self.d2), ("d3", self.d3),
                        ("c10", self.c10), ("c11", self.c11), ("c12", self.c12)]

    def named_parameters(self):
        return _named("", self._layers)

    def __call__(self, z: Tensor, trace: list = None) -> Tensor:
        def t(name, v):
            if trace is not None:
                trace.append((name, v.shape))
        u = self.cfg.upsamples
        x = upsample1d(z, u[0]); t("up1", x)
        x = relu(self.c7(x)); t("c7", x)
        x = upsample1d(x, u[1]); t("up2", x)
        x = relu(self.c8(x)); t("c8", x)
        x = upsample1d(x, u[2]); t("up3", x)
        x = relu(self.c9(x)); t("c9", x)
        x = relu(self.d1(x)); t("d1", x)
        x = relu(self.d2(x)); t("d2", x)
        x = relu(self.d3(x)); t("d3", x)
        x = relu(self.c10(x)); t("c10", x)
        x = relu(self.c11(x)); t("c11", x)
        x = self.c12(x); t("c12", x)  # linear output
        return x


class MirrorNet(Module):
    """The encoder/decoder pair built from one seeded generator."""

    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.config = cfg
        self.encoder = Encoder(cfg, rng)
        self.decoder = Decoder(cfg, rng)

    def named_parameters(self):
        return (
            [(f"encoder.{n}", p) for n, p in self.encoder.named_parameters()]
            + [(f"decoder.{n}", p) for n, p in self.decoder.named_parameters()]
        )
