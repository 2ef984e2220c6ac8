"""Child-process plant adapter: CSV hand-off, format repair, failure modes."""

import logging
import os
import stat
import sys

import numpy as np
import pytest

from mirrornet.adapter import AdapterConfig, ExternalPlant, external_render
from mirrornet.errors import ConfigError, PlantError
from mirrornet.params import MelodyParams, N_MODELED
from mirrornet.plant import ReferencePlant
from mirrornet.wavio import write_wav


def melody(seed=3, n_notes=3):
    rng = np.random.default_rng(seed)
    return MelodyParams.from_latent(rng.uniform(0.1, 0.9, (N_MODELED, n_notes)))


def script_cfg(tmp_path, body, **kwargs):
    """Wrap a python snippet as an adapter command taking (csv, wav) argv."""
    path = tmp_path / "plant.py"
    path.write_text(body)
    defaults = dict(sample_rate=16000, total_duration=2.0, timeout=30.0)
    defaults.update(kwargs)
    return AdapterConfig((sys.executable, str(path)), **defaults)


def test_bundled_echo_plant_matches_builtin(tmp_path):
    cfg = AdapterConfig.bundled_echo(sample_rate=16000, total_duration=2.0)
    mel = melody()
    got = external_render(mel, cfg)
    ref = ReferencePlant(sample_rate=16000, total_duration=2.0).render_melody(mel)
    assert got.sample_rate == 16000
    assert got.samples.shape == ref.samples.shape
    # the only differences come from the 16-bit WAV round trip
    assert np.max(np.abs(got.samples - ref.samples)) <= 1.0 / 32767.0


def test_missing_executable_is_a_config_error():
    cfg = AdapterConfig(("/no/such/binary",), 16000, 2.0, 5.0)
    with pytest.raises(ConfigError):
        external_render(melody(), cfg)


def test_nonzero_exit_surfaces_stderr_tail(tmp_path):
    cfg = script_cfg(tmp_path, (
        "import sys\n"
        "print('stage one failed', file=sys.stderr)\n"
        "print('detail: bad knob', file=sys.stderr)\n"
        "sys.exit(3)\n"
    ))
    with pytest.raises(PlantError) as exc:
        external_render(melody(), cfg)
    assert "bad knob" in str(exc.value)


def test_malformed_wav_is_a_plant_error(tmp_path):
    cfg = script_cfg(tmp_path, (
        "import sys\n"
        "open(sys.argv[2], 'wb').write(b'RIFFgarbage')\n"
    ))
    with pytest.raises(PlantError):
        external_render(melody(), cfg)


def test_missing_output_is_a_plant_error(tmp_path):
    cfg = script_cfg(tmp_path, "pass\n")
    with pytest.raises(PlantError):
        external_render(melody(), cfg)


def test_timeout_is_a_plant_error(tmp_path):
    cfg = script_cfg(tmp_path, "import time\ntime.sleep(60)\n", timeout=0.5)
    with pytest.raises(PlantError):
        external_render(melody(), cfg)


def test_wrong_rate_and_length_are_repaired_with_warnings(tmp_path, caplog):
    body = (
        "import sys\n"
        "import numpy as np\n"
        "sys.path.insert(0, {src!r})\n"
        "from mirrornet.wavio import write_wav\n"
        "t = np.arange(8000) / 8000.0\n"
        "write_wav(sys.argv[2], np.sin(2 * np.pi * 220 * t), 8000)\n"
    ).format(src=os.path.join(os.path.dirname(__file__), "..", "src"))
    cfg = script_cfg(tmp_path, body)
    with caplog.at_level(logging.WARNING, logger="mirrornet.adapter"):
        buf = external_render(melody(), cfg)
    assert buf.sample_rate == 16000
    assert buf.samples.shape == (32000,)
    text = caplog.text.lower()
    assert "resampl" in text
    assert "length" in text or "fitting" in text or "samples" in text


def test_adapter_receives_headerless_full_width_csv(tmp_path):
    capture = tmp_path / "seen.csv"
    body = (
        "import shutil, sys\n"
        f"shutil.copy(sys.argv[1], {str(capture)!r})\n"
        "import numpy as np, wave\n"
        "w = wave.open(sys.argv[2], 'wb')\n"
        "w.setnchannels(1); w.setsampwidth(2); w.setframerate(16000)\n"
        "w.writeframes(np.zeros(32000, dtype='<i2').tobytes())\n"
        "w.close()\n"
    )
    cfg = script_cfg(tmp_path, body)
    mel = melody(n_notes=4)
    external_render(mel, cfg)
    rows = capture.read_text().strip().split("\n")
    assert len(rows) == 4
    mat = np.array([[float(c) for c in r.split(",")] for r in rows])
    np.testing.assert_allclose(mat, mel.to_array(), rtol=0, atol=0)


def test_external_plant_object_renders_latents(tmp_path):
    cfg = AdapterConfig.bundled_echo(sample_rate=16000, total_duration=2.0)
    plant = ExternalPlant(cfg)
    lat = np.full((N_MODELED, 2), 0.5)
    buf = plant(lat)
    assert buf.samples.shape == (32000,)


def test_adapter_config_rejects_empty_command():
    with pytest.raises(ConfigError):
        AdapterConfig((), 16000, 2.0, 5.0)
