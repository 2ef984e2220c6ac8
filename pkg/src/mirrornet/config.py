"""Run configuration: one structured object covering plant, front-end, model
and training, with canonical hashing so every artifact can say exactly which
settings produced it.

Two built-in profiles:

* ``paper``: the full-size topology (128 x 250 spectrograms, 7 x 5 latent).
  Training at this size is far outside desk budgets; the profile exists for
  shape work and as the reference point the tiny profile scales down from.
* ``tiny``: 32 x 50 spectrograms, 7 x 2 latent, quarter widths, tuned so the
  whole train/eval cycle runs in CPU minutes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .network import ModelConfig, PAPER_MODEL, TINY_MODEL
from .params import ParamRanges
from .spectro import FilterbankConfig


@dataclass(frozen=True)
class PlantConfig:
    sample_rate: int = 16000
    total_duration: float = 2.0
    ranges: ParamRanges = field(default_factory=ParamRanges)
    # None means the built-in plant; otherwise the adapter argv prefix.
    adapter_command: tuple = None
    adapter_timeout: float = 120.0

    def __post_init__(self):
        if self.sample_rate < 1000:
            raise ConfigError(f"sample_rate {self.sample_rate} is implausibly low")
        if self.total_duration <= 0:
            raise ConfigError("total_duration must be positive")
        if self.adapter_command is not None:
            object.__setattr__(
                self, "adapter_command", tuple(str(c) for c in self.adapter_command)
            )


@dataclass(frozen=True)
class DataConfig:
    n_train: int = 60
    n_test: int = 20

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("dataset sizes must be at least 1")


@dataclass(frozen=True)
class TrainConfig:
    outer_iters: int = 60
    epochs_dec: int = 5
    epochs_enc: int = 5
    batch_size: int = 20
    lr_enc: float = 1e-2
    lr_dec: float = 1e-3
    lr_decay_gamma: float = 0.5
    lr_decay_interval: int = 20
    # fraction of decoder-phase latents replaced by uniform random draws;
    # the first outer iteration is pure babbling so the decoder can start
    # without trusting an untrained encoder
    babble_rho_first: float = 1.0
    babble_rho: float = 0.25
    # floor on babbled codes per decoder phase: when round(rho * n) falls
    # short, extra uniform draws are appended beyond the corpus so the
    # decoder stays an honest surrogate even on corpora of a few items
    babble_min: int = 0
    # bounded FIFO of recently rendered (code, spectrogram) pairs folded into
    # every decoder phase, so the surrogate accumulates plant knowledge
    # instead of forgetting each iteration's renders; 0 = off
    babble_replay: int = 0
    # fraction of outer_iters during which the floor and the replay apply;
    # after that the pool returns to plain replacement babbling, which lets
    # the decoder settle onto the corpus once exploration has paid out
    babble_until_frac: float = 1.0
    convergence_tol: float = 1e-3
    patience: int = 10
    divergence_factor: float = 10.0
    checkpoint_interval: int = 0  # 0 = final checkpoint only

    def __post_init__(self):
        if self.outer_iters < 1:
            raise ConfigError("outer_iters must be at least 1")
        if self.epochs_dec < 1 or self.epochs_enc < 1:
            raise ConfigError("epochs per phase must be at least 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if not (0.0 <= self.babble_rho <= 1.0 and 0.0 <= self.babble_rho_first <= 1.0):
            raise ConfigError("babbling ratios must lie in [0, 1]")
        if self.babble_min < 0:
            raise ConfigError("babble_min cannot be negative")
        if self.babble_replay < 0:
            raise ConfigError("babble_replay cannot be negative")
        if not 0.0 <= self.babble_until_frac <= 1.0:
            raise ConfigError("babble_until_frac must lie in [0, 1]")
        if self.lr_enc <= 0 or self.lr_dec <= 0:
            raise ConfigError("learning rates must be positive")
        if self.lr_decay_interval < 1:
            raise ConfigError("lr_decay_interval must be at least 1")
        if self.patience < 1:
            raise ConfigError("patience must be at least 1")
        if self.divergence_factor <= 0:
            raise ConfigError("divergence_factor must be positive")


@dataclass(frozen=True)
class RunConfig:
    profile: str = "tiny"
    seed: int = 0
    plant: PlantConfig = field(default_factory=PlantConfig)
    spectro: FilterbankConfig = field(default_factory=FilterbankConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    data: DataConfig = field(default_factory=DataConfig)
    training: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.model.n_channels != self.spectro.n_channels:
            raise ConfigError(
                f"model n_channels {self.model.n_channels} != spectrogram "
                f"channels {self.spectro.n_channels}"
            )
        if self.model.n_frames != self.spectro.frames_per_clip:
            raise ConfigError(
                f"model n_frames {self.model.n_frames} != frames_per_clip "
                f"{self.spectro.frames_per_clip}"
            )
        if abs(self.spectro.clip_seconds - self.plant.total_duration) > 1e-12:
            raise ConfigError(
                f"spectrogram clip_seconds {self.spectro.clip_seconds} != plant "
                f"total_duration {self.plant.total_duration}"
            )

    # ------------------------------------------------------------------ #
    # serialization
    # ------------------------------------------------------------------ #
    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["plant"]["ranges"] = self.plant.ranges.to_dict()
        if self.plant.adapter_command is not None:
            d["plant"]["adapter_command"] = list(self.plant.adapter_command)
        for key in ("pre_filters", "head_filters", "dilations", "pools", "upsamples"):
            d["model"][key] = list(d["model"][key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        top = dict(d)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(top) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        if "profile" in top:
            kwargs["profile"] = str(top["profile"])
        if "seed" in top:
            kwargs["seed"] = int(top["seed"])
        if "plant" in top:
            sub = dict(top["plant"])
            if "ranges" in sub:
                sub["ranges"] = ParamRanges.from_dict(sub["ranges"])
            if sub.get("adapter_command") is not None:
                sub["adapter_command"] = tuple(sub["adapter_command"])
            kwargs["plant"] = _strict_build(PlantConfig, sub, "plant")
        if "spectro" in top:
            kwargs["spectro"] = _strict_build(FilterbankConfig, top["spectro"], "spectro")
        if "model" in top:
            kwargs["model"] = _strict_build(ModelConfig, top["model"], "model")
        if "data" in top:
            kwargs["data"] = _strict_build(DataConfig, top["data"], "data")
        if "training" in top:
            kwargs["training"] = _strict_build(TrainConfig, top["training"], "training")
        return cls(**kwargs)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()[:12]

    def replace(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)


def _strict_build(dc_type, d: dict, path: str):
    if isinstance(d, dc_type):
        return d
    if not isinstance(d, dict):
        raise ConfigError(f"config section {path!r} must be a mapping")
    known = {f.name for f in dataclasses.fields(dc_type)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys under {path!r}: {sorted(unknown)}")
    kwargs = {}
    for key, val in d.items():
        kwargs[key] = tuple(val) if isinstance(val, list) else val
    return dc_type(**kwargs)


def paper_profile(seed: int = 0) -> RunConfig:
    return RunConfig(
        profile="paper",
        seed=seed,
        plant=PlantConfig(),
        spectro=FilterbankConfig(),
        model=PAPER_MODEL,
        data=DataConfig(n_train=400, n_test=80),
        training=TrainConfig(
            outer_iters=100,
            lr_enc=1e-2,
            lr_dec=1e-3,
            lr_decay_interval=20,
        ),
    )


def tiny_profile(seed: int = 0) -> RunConfig:
    return RunConfig(
        profile="tiny",
        seed=seed,
        plant=PlantConfig(),
        spectro=FilterbankConfig(
            n_channels=32,
            frames_per_clip=50,
            n_fft=2048,
        ),
        model=TINY_MODEL,
        data=DataConfig(n_train=60, n_test=20),
        training=TrainConfig(
            outer_iters=150,
            lr_enc=1e-3,
            lr_dec=3e-3,
            lr_decay_interval=100,
            babble_min=32,
            babble_replay=64,
            babble_until_frac=0.6,
            patience=30,
        ),
    )


PROFILES = {"paper": paper_profile, "tiny": tiny_profile}


def load_profile(name: str, seed: int = 0) -> RunConfig:
    try:
        factory = PROFILES[name]
    except KeyError:
        raise ConfigError(
            f"unknown profile {name!r}; available: {sorted(PROFILES)}"
        ) from None
    return factory(seed)


def merge_config_file(base: RunConfig, path) -> RunConfig:
    """Overlay a JSON config file on a profile, rejecting unknown keys."""
    with open(path) as f:
        overlay = json.load(f)
    if not isinstance(overlay, dict):
        raise ConfigError(f"{path}: config file must hold a JSON object")
    merged = _deep_merge(base.to_dict(), overlay, "")
    return RunConfig.from_dict(merged)


def _deep_merge(base: dict, overlay: dict, path: str) -> dict:
    out = dict(base)
    for key, val in overlay.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _deep_merge(base[key], val, where)
        else:
            out[key] = val
    return out
