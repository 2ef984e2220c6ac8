"""Run configuration: profiles, serialization, hashing, strict overlays."""

import dataclasses
import json

import pytest

from mirrornet.config import (RunConfig, load_profile, merge_config_file,
                              paper_profile, tiny_profile)
from mirrornet.errors import ConfigError


def test_profiles_are_internally_consistent():
    for cfg in (tiny_profile(0), paper_profile(0)):
        assert cfg.model.n_channels == cfg.spectro.n_channels
        assert cfg.model.n_frames == cfg.spectro.frames_per_clip
        assert cfg.spectro.clip_seconds == cfg.plant.total_duration


def test_tiny_profile_is_actually_tiny():
    cfg = tiny_profile(0)
    assert cfg.spectro.n_channels == 32
    assert cfg.spectro.frames_per_clip == 50
    assert cfg.model.latent_shape == (7, 2)
    assert cfg.data.n_train == 60 and cfg.data.n_test == 20


def test_full_profile_matches_published_dimensions():
    cfg = paper_profile(0)
    assert cfg.spectro.n_channels == 128
    assert cfg.spectro.frames_per_clip == 250
    assert cfg.model.latent_shape == (7, 5)
    assert cfg.training.lr_enc == pytest.approx(1e-2)
    assert cfg.training.lr_dec == pytest.approx(1e-3)
    assert cfg.training.lr_decay_gamma == pytest.approx(0.5)


def test_unknown_profile_rejected():
    with pytest.raises(ConfigError):
        load_profile("huge")


def test_dict_round_trip_preserves_hash():
    cfg = tiny_profile(7)
    again = RunConfig.from_dict(cfg.to_dict())
    assert again.hash() == cfg.hash()
    assert again == cfg


def test_hash_tracks_content_not_identity():
    a = tiny_profile(7)
    b = tiny_profile(7)
    c = tiny_profile(8)
    assert a.hash() == b.hash()
    assert a.hash() != c.hash()
    d = a.replace(training=dataclasses.replace(a.training, lr_enc=5e-3))
    assert d.hash() != a.hash()


def test_from_dict_rejects_unknown_keys():
    d = tiny_profile(0).to_dict()
    d["bogus"] = 1
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)
    d2 = tiny_profile(0).to_dict()
    d2["training"]["momentum"] = 0.9
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d2)


def test_cross_section_validation():
    cfg = tiny_profile(0)
    d = cfg.to_dict()
    d["spectro"]["n_channels"] = 64  # model still says 32
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)


def test_training_validation():
    d = tiny_profile(0).to_dict()
    d["training"]["babble_rho"] = 1.5
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)
    d = tiny_profile(0).to_dict()
    d["training"]["outer_iters"] = 0
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)
    d = tiny_profile(0).to_dict()
    d["training"]["babble_min"] = -1
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)
    d = tiny_profile(0).to_dict()
    d["training"]["babble_until_frac"] = 1.5
    with pytest.raises(ConfigError):
        RunConfig.from_dict(d)


def test_overlay_file_merges_and_rejects_unknown(tmp_path):
    good = tmp_path / "ok.json"
    good.write_text(json.dumps({"training": {"outer_iters": 3},
                                "data": {"n_train": 5, "n_test": 2}}))
    cfg = merge_config_file(tiny_profile(0), good)
    assert cfg.training.outer_iters == 3
    assert cfg.data.n_train == 5
    # untouched fields keep profile values
    assert cfg.training.lr_dec == tiny_profile(0).training.lr_dec

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"training": {"outer_loops": 3}}))
    with pytest.raises(ConfigError) as exc:
        merge_config_file(tiny_profile(0), bad)
    assert "training.outer_loops" in str(exc.value)

    notobj = tmp_path / "arr.json"
    notobj.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        merge_config_file(tiny_profile(0), notobj)


def test_adapter_command_survives_round_trip():
    cfg = tiny_profile(0)
    cfg = cfg.replace(plant=dataclasses.replace(
        cfg.plant, adapter_command=("mysynth", "--fast")))
    again = RunConfig.from_dict(cfg.to_dict())
    assert again.plant.adapter_command == ("mysynth", "--fast")
    assert again.hash() == cfg.hash()


def test_canonical_json_is_stable_and_compact():
    s = tiny_profile(3).canonical_json()
    assert s == tiny_profile(3).canonical_json()
    assert "\n" not in s and ": " not in s
    parsed = json.loads(s)
    assert parsed["seed"] == 3
