"""Unsupervised discovery of synthesizer controls from auditory spectrograms.

A constrained autoencoder learns, without parameter labels, to drive a sound
synthesizer (the "plant") so that the plant's output matches an input melody.
The decoder doubles as a differentiable stand-in for the plant, which is what
lets gradients reach the control space.  Everything here runs on numpy; the
autodiff engine, layers, and optimizer live in this package.
"""

from .adapter import AdapterConfig, ExternalPlant, external_render
from .config import (DataConfig, PlantConfig, RunConfig, TrainConfig,
                     load_profile, merge_config_file, paper_profile, tiny_profile)
from .datasets import (Dataset, DatasetItem, generate_external_standin,
                       generate_set1, generate_set2, ingest_external,
                       load_dataset, piano_like_melody, save_dataset)
from .errors import (ConfigError, MirrorNetError, PlantError, ShapeError,
                     TrainingDiverged)
from .evaluate import (MetricsReport, StatTestResult, brown_forsythe, evaluate,
                       parameter_mse, reconstruction_mse, stat_tests)
from .figures import emit_figures, write_pgm
from .network import (Decoder, Encoder, MirrorNet, ModelConfig, PAPER_MODEL,
                      TINY_MODEL)
from .nn import Adam, Conv1d, Module, decayed_lr
from .params import (MelodyParams, N_MODELED, N_PARAMS, NoteParams,
                     PARAM_FIELDS, PARAM_NAMES, ParamRanges, Range,
                     VIBRATO_DEFAULTS, denormalize, midi_to_hz)
from .plant import AudioBuffer, ReferencePlant, render_melody, render_note
from .spectro import (AuditorySpectrogram, FilterbankConfig, SpectrogramFrontend,
                      build_filterbank, compute_spectrogram, spectrogram_from_csv,
                      spectrogram_to_csv)
from .tensor import Tensor
from .training import (InferenceState, TrainState, infer_controls, infer_latents,
                       load_trained, train)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"

__all__ = [
    "AdapterConfig", "ExternalPlant", "external_render",
    "DataConfig", "PlantConfig", "RunConfig", "TrainConfig",
    "load_profile", "merge_config_file", "paper_profile", "tiny_profile",
    "Dataset", "DatasetItem", "generate_external_standin", "generate_set1",
    "generate_set2", "ingest_external", "load_dataset", "piano_like_melody",
    "save_dataset",
    "ConfigError", "MirrorNetError", "PlantError", "ShapeError",
    "TrainingDiverged",
    "MetricsReport", "StatTestResult", "brown_forsythe", "evaluate",
    "parameter_mse", "reconstruction_mse", "stat_tests",
    "emit_figures", "write_pgm",
    "Decoder", "Encoder", "MirrorNet", "ModelConfig", "PAPER_MODEL", "TINY_MODEL",
    "Adam", "Conv1d", "Module", "decayed_lr",
    "MelodyParams", "N_MODELED", "N_PARAMS", "NoteParams", "PARAM_FIELDS",
    "PARAM_NAMES", "ParamRanges", "Range", "VIBRATO_DEFAULTS", "denormalize",
    "midi_to_hz",
    "AudioBuffer", "ReferencePlant", "render_melody", "render_note",
    "AuditorySpectrogram", "FilterbankConfig", "SpectrogramFrontend",
    "build_filterbank", "compute_spectrogram", "spectrogram_from_csv",
    "spectrogram_to_csv",
    "Tensor",
    "InferenceState", "TrainState", "infer_controls", "infer_latents",
    "load_trained", "train",
    "read_wav", "write_wav",
    "__version__",
]
