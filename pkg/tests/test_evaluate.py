"""Variance statistics and the metrics report."""

import numpy as np
import pytest
import scipy.stats

from mirrornet.evaluate import (RANDOM_BASELINE_MAD, MetricsReport,
                                brown_forsythe, random_baseline_mse, stat_tests)
from mirrornet.params import N_MODELED, PARAM_NAMES


def test_brown_forsythe_matches_hand_computation():
    # worked example: A = {0,0,0,1}, B = {-.5,.5,-.5,.5}
    # medians 0 and 0; |x - median| gives zA = {0,0,0,1}, zB = {.5,.5,.5,.5}
    # between-group SS = 0.125, within-group SS = 0.75, W = 6/1 * .125/.75 = 1
    w, p = brown_forsythe(np.array([0.0, 0.0, 0.0, 1.0]),
                          np.array([-0.5, 0.5, -0.5, 0.5]))
    assert w == pytest.approx(1.0, rel=1e-12)
    assert p == pytest.approx(0.355917683749582, rel=1e-9)


def test_brown_forsythe_agrees_with_scipy_levene():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.normal(0, rng.uniform(0.5, 2.0), rng.integers(5, 40))
        b = rng.normal(0, rng.uniform(0.5, 2.0), rng.integers(5, 40))
        w_got, p_got = brown_forsythe(a, b)
        w_ref, p_ref = scipy.stats.levene(a, b, center="median")
        assert w_got == pytest.approx(w_ref, rel=1e-10)
        assert p_got == pytest.approx(p_ref, rel=1e-10)


def test_brown_forsythe_degenerate_cases():
    # identical spreads: no between-group variation
    w, p = brown_forsythe(np.array([1.0, 2.0]), np.array([5.0, 6.0]))
    assert w == 0.0 and p == 1.0
    # zero within-group variation but different spreads
    w, p = brown_forsythe(np.array([0.0, 0.0, 0.0, 0.0]),
                          np.array([-1.0, 1.0, -1.0, 1.0]))
    assert w == np.inf and p == 0.0
    # scipy pins the same case to (inf, 0) wherever it defines the statistic
    with np.errstate(all="ignore"):
        w_ref, p_ref = scipy.stats.levene(np.array([0.0, 0.0, 0.0, 0.0]),
                                          np.array([-1.0, 1.0, -1.0, 1.0]),
                                          center="median")
    assert not np.isfinite(w_ref) or w_ref > 1e10
    assert p_ref == pytest.approx(0.0, abs=1e-12)


def test_brown_forsythe_input_validation():
    with pytest.raises(ValueError):
        brown_forsythe(np.array([1.0]))
    with pytest.raises(ValueError):
        brown_forsythe(np.array([1.0]), np.array([2.0]))  # groups of size 1


def test_uniform_difference_moments():
    # E|u - v| = 1/3 for independent uniforms; the baseline constant
    rng = np.random.default_rng(3)
    d = rng.uniform(size=200000) - rng.uniform(size=200000)
    assert np.mean(np.abs(d)) == pytest.approx(1.0 / 3.0, abs=2e-3)
    assert RANDOM_BASELINE_MAD == pytest.approx(1.0 / 3.0)


def test_stat_tests_separate_good_predictions_from_noise():
    rng = np.random.default_rng(4)
    truth = rng.uniform(size=(200, 2, 10))
    good = truth.copy()
    good[:, :, :N_MODELED] += rng.normal(0, 0.02, size=(200, 2, N_MODELED))
    good = np.clip(good, 0.0, 1.0)
    res = stat_tests(good, truth, seed=0)
    assert tuple(res.param_names) == PARAM_NAMES[:N_MODELED]
    assert res.n_significant() == N_MODELED
    assert all(m < 0.06 for m in res.mad)
    assert all(p < 1e-6 for p in res.p)

    noise = rng.uniform(size=(200, 2, 10))
    res2 = stat_tests(noise, truth, seed=0)
    assert res2.n_significant() <= 2  # chance-level predictions should not separate
    text = res2.render_text()
    assert "MIDI note (Pitch)" in text
    csv = res2.to_csv()
    assert csv.count("\n") == N_MODELED + 1


def test_stat_tests_shape_validation():
    with pytest.raises(ValueError):
        stat_tests(np.zeros((3, 2, 10)), np.zeros((4, 2, 10)), seed=0)


def test_metrics_report_renders_table():
    rep = MetricsReport(provenance="set1", n_runs=2,
                        spec_train=(0.01, 1e-5), spec_test=(0.02, 2e-5),
                        param_train=(0.10, 0.0), param_test=(0.12, 0.0),
                        config_hash="abc123", seed=7)
    text = rep.render_text()
    assert "Input melody type" in text
    assert "Train/Test for Input vs Plant(learned)" in text
    assert "set1" in text
    assert "abc123" in text
    assert "0.0100" in text and "0.0200" in text
    csv = rep.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0].startswith("input_melody_type,")
    assert len(lines) == 2
    # missing ground truth renders as n/a, not as zeros
    blank = MetricsReport(provenance="external", n_runs=1,
                          spec_train=(0.01, 0.0), spec_test=(0.02, 0.0),
                          param_train=None, param_test=None,
                          config_hash="abc123", seed=7)
    assert "n/a" in blank.render_text()


def test_random_baseline_mse_is_positive_and_seeded():
    import dataclasses

    from mirrornet.config import tiny_profile
    from mirrornet.datasets import generate_set1
    from mirrornet.plant import ReferencePlant
    from mirrornet.spectro import SpectrogramFrontend

    cfg = tiny_profile(0)
    fe = SpectrogramFrontend(cfg.spectro, cfg.plant.sample_rate)
    plant = ReferencePlant(cfg.plant.ranges, cfg.plant.sample_rate,
                           cfg.plant.total_duration)
    _, test = generate_set1(2, 2, 3, fe, n_notes=cfg.model.n_notes)
    a = random_baseline_mse(test, plant, fe, norm=3.0, seed=5,
                            n_params=7, n_notes=cfg.model.n_notes)
    b = random_baseline_mse(test, plant, fe, norm=3.0, seed=5,
                            n_params=7, n_notes=cfg.model.n_notes)
    assert a == pytest.approx(b, rel=1e-12)
    assert len(a) if hasattr(a, "__len__") else a > 0
