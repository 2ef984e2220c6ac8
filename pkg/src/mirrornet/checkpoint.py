"""Single-file checkpoint format.

Layout: one ASCII line holding the byte length of the JSON manifest, the
manifest itself, a newline, then the raw little-endian float32 arrays
concatenated in manifest order.  The manifest carries the full run
configuration, its hash, the seed, the spectrogram normalization constant and
the optimizer counters, so any artifact can be reproduced from the header
alone.  Serialization is canonical (sorted keys, fixed separators) so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError

FORMAT_NAME = "mirrornet-checkpoint-1"


def _entries(model, opt_enc, opt_dec):
    """(name, array) pairs: parameters first, then optimizer moments."""
    pairs = list(model.named_parameters())
    out = [(name, p.data) for name, p in pairs]
    for prefix, opt, module in (("encoder", opt_enc, model.encoder),
                                ("decoder", opt_dec, model.decoder)):
        if opt is None:
            continue
        named = module.named_parameters()
        if len(named) != len(opt.params):
            raise ConfigError("optimizer does not match the model it claims to own")
        for (name, _), m, v in zip(named, opt.m, opt.v):
            out.append((f"optim.{prefix}.m.{name}", m))
            out.append((f"optim.{prefix}.v.{name}", v))
    return out


def _opt_meta(opt):
    if opt is None:
        return None
    return {"t": opt.t, "lr": opt.lr, "lr0": opt.lr0,
            "decay_gamma": opt.decay_gamma, "decay_interval": opt.decay_interval}


def save_checkpoint(path, model, opt_enc=None, opt_dec=None, *, config_dict,
                    config_hash, seed, norm_constant, outer_iter=0, extra=None):
    entries = _entries(model, opt_enc, opt_dec)
    manifest = {
        "format": FORMAT_NAME,
        "config": config_dict,
        "config_hash": config_hash,
        "seed": int(seed),
        "norm_constant": float(norm_constant),
        "outer_iter": int(outer_iter),
        "optim": {"encoder": _opt_meta(opt_enc), "decoder": _opt_meta(opt_dec)},
        "entries": [
            {"name": name, "shape": list(arr.shape), "dtype": "<f4"}
            for name, arr in entries
        ],
    }
    if extra:
        manifest["extra"] = extra
    blob = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(b"%d\n" % len(blob))
        f.write(blob)
        f.write(b"\n")
        for _, arr in entries:
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def load_checkpoint(path):
    """Returns (manifest, arrays) with arrays converted back to float64."""
    with open(path, "rb") as f:
        header = f.readline()
        try:
            length = int(header.strip())
        except ValueError:
            raise ConfigError(f"{path}: not a checkpoint file") from None
        blob = f.read(length)
        if len(blob) != length or f.read(1) != b"\n":
            raise ConfigError(f"{path}: truncated checkpoint manifest")
        manifest = json.loads(blob.decode("utf-8"))
        if manifest.get("format") != FORMAT_NAME:
            raise ConfigError(f"{path}: unknown checkpoint format {manifest.get('format')!r}")
        arrays = {}
        for entry in manifest["entries"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = f.read(4 * count)
            if len(raw) != 4 * count:
                raise ConfigError(f"{path}: truncated array {entry['name']!r}")
            arrays[entry["name"]] = (
                np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)
            )
        if f.read(1):
            raise ConfigError(f"{path}: trailing bytes after the last array")
    return manifest, arrays


def restore_model(manifest, arrays, model, opt_enc=None, opt_dec=None):
    """Load arrays back into a freshly built model (and optionally optimizers)."""
    for name, p in model.named_parameters():
        if name not in arrays:
            raise ConfigError(f"checkpoint is missing parameter {name!r}")
        if arrays[name].shape != p.data.shape:
            raise ConfigError(
                f"checkpoint parameter {name!r} has shape {arrays[name].shape}, "
                f"model wants {p.data.shape}"
            )
        p.data = arrays[name].copy()
    for prefix, opt, module in (("encoder", opt_enc, model.encoder),
                                ("decoder", opt_dec, model.decoder)):
        if opt is None:
            continue
        meta = manifest["optim"][prefix]
        opt.t = int(meta["t"])
        opt.lr = float(meta["lr"])
        opt.lr0 = float(meta["lr0"])
        for i, (name, _) in enumerate(module.named_parameters()):
            opt.m[i] = arrays[f"optim.{prefix}.m.{name}"].copy()
            opt.v[i] = arrays[f"optim.{prefix}.v.{name}"].copy()
