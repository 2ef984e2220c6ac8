"""Metrics and statistics for trained models.

Two kinds of evidence: reconstruction quality (spectrogram MSE between the
input and what the plant produces from the inferred controls, on the
normalized scale), and parameter recovery where ground truth exists (per
parameter mean absolute difference plus a median-centered Levene test of the
truth-minus-predicted spread against a random-guess baseline).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import f as f_dist

from .params import N_MODELED, PARAM_NAMES
from .training import infer_latents

# E|u - v| for independent uniforms on [0, 1]: the mean absolute error a
# random guesser commits, quoted alongside the per-parameter numbers.
RANDOM_BASELINE_MAD = 1.0 / 3.0


def brown_forsythe(*groups):
    """Median-centered Levene test for equal spread across groups.

    Returns (W, p).  Degenerate corners are pinned rather than left to
    floating point: zero between-group spread difference gives (0, 1), zero
    within-group variability with a nonzero between term gives (inf, 0).
    """
    gs = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(gs) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) < 2 for g in gs):
        raise ValueError("every group needs at least two samples")
    z = [np.abs(g - np.median(g)) for g in gs]
    n_j = np.array([len(zj) for zj in z], dtype=np.float64)
    zbar_j = np.array([zj.mean() for zj in z])
    zbar = np.concatenate(z).mean()
    n_total = n_j.sum()
    k = len(gs)
    between = float(np.sum(n_j * (zbar_j - zbar) ** 2))
    within = float(sum(((zj - m) ** 2).sum() for zj, m in zip(z, zbar_j)))
    if between == 0.0:
        return 0.0, 1.0
    if within == 0.0:
        return float("inf"), 0.0
    w = (n_total - k) / (k - 1) * between / within
    p = float(f_dist.sf(w, k - 1, n_total - k))
    return w, p


@dataclass
class StatTestResult:
    param_names: tuple
    diffs: list  # per parameter, truth - predicted samples
    baseline: np.ndarray  # u - v samples for independent uniform draws
    w: np.ndarray
    p: np.ndarray
    mad: np.ndarray  # per parameter mean |difference|
    baseline_mad: float

    def n_significant(self, alpha: float = 0.05) -> int:
        return int(np.sum(self.p < alpha))

    def render_text(self) -> str:
        lines = [
            "Parameter recovery vs a uniform-random baseline",
            "(differences are truth - predicted per note; spread compared with a",
            " median-centered Levene test; baseline = u - v for independent uniforms)",
            "",
            "%-38s %8s %12s %12s" % ("Parameter", "MAD", "W", "p"),
        ]
        for name, mad, w, p in zip(self.param_names, self.mad, self.w, self.p):
            lines.append("%-38s %8.4f %12.4g %12.4g" % (name, mad, w, p))
        lines.append("")
        lines.append("random-baseline MAD: %.4f (analytic 1/3 = %.4f, n=%d)"
                     % (self.baseline_mad, RANDOM_BASELINE_MAD, len(self.baseline)))
        return "\n".join(lines)

    def to_csv(self) -> str:
        rows = ["parameter,mad,W,p"]
        for name, mad, w, p in zip(self.param_names, self.mad, self.w, self.p):
            rows.append("%s,%.17g,%.17g,%.17g" % (name.replace(",", ";"), mad, w, p))
        return "\n".join(rows) + "\n"


def stat_tests(predictions, ground_truth, seed: int) -> StatTestResult:
    """Compare per-note predictions with truth for the modeled parameters.

    Both inputs are (B, N, P) with P >= 7; only the first seven columns are
    tested.  The baseline difference sample is drawn once with the given seed
    and shared by all parameters, with the same sample count as the real
    differences so the test groups stay balanced.
    """
    pred = np.asarray(predictions, dtype=np.float64)
    truth = np.asarray(ground_truth, dtype=np.float64)
    if pred.shape[:2] != truth.shape[:2]:
        raise ValueError(f"prediction/truth shapes differ: {pred.shape} vs {truth.shape}")
    if pred.shape[0] * pred.shape[1] < 2:
        raise ValueError("need at least two note samples for the spread test")
    diffs = [
        (truth[:, :, j] - pred[:, :, j]).ravel()
        for j in range(N_MODELED)
    ]
    rng = np.random.default_rng(seed)
    m = diffs[0].size
    baseline = rng.uniform(size=m) - rng.uniform(size=m)
    w = np.empty(N_MODELED)
    p = np.empty(N_MODELED)
    for j, d in enumerate(diffs):
        w[j], p[j] = brown_forsythe(d, baseline)
    mad = np.array([np.abs(d).mean() for d in diffs])
    return StatTestResult(
        param_names=PARAM_NAMES[:N_MODELED],
        diffs=diffs,
        baseline=baseline,
        w=w,
        p=p,
        mad=mad,
        baseline_mad=float(np.abs(baseline).mean()),
    )


# ---------------------------------------------------------------------- #
# reconstruction metrics
# ---------------------------------------------------------------------- #
def reconstruction_mse(state, dataset, plant, frontend) -> np.ndarray:
    """Per-item spectrogram MSE between input and plant(inferred controls),
    both on the checkpoint's normalized scale."""
    norm = state.norm_constant
    specs = dataset.spectrograms()
    latents = infer_latents(state, specs)
    out = np.empty(len(dataset))
    for i, z in enumerate(latents):
        rendered = frontend(plant(z)) / norm
        target = specs[i] / norm
        out[i] = float(np.mean((rendered - target) ** 2))
    return out


def random_baseline_mse(dataset, plant, frontend, norm, seed: int,
                        n_params: int, n_notes: int) -> np.ndarray:
    """Per-item spectrogram MSE for uniform-random control matrices."""
    rng = np.random.default_rng(seed)
    out = np.empty(len(dataset))
    for i, item in enumerate(dataset.items):
        z = rng.uniform(size=(n_params, n_notes))
        rendered = frontend(plant(z)) / norm
        out[i] = float(np.mean((rendered - item.spectrogram / norm) ** 2))
    return out


def parameter_mse(state, dataset) -> float:
    """Mean squared error over the seven modeled parameters, all notes."""
    truth = dataset.params_array()[:, :, :N_MODELED]
    latents = infer_latents(state, dataset.spectrograms())
    pred = np.transpose(latents, (0, 2, 1))[:, :, :N_MODELED]
    return float(np.mean((truth - pred) ** 2))


@dataclass
class MetricsReport:
    provenance: str
    n_runs: int
    spec_train: tuple  # (mean, variance) across runs
    spec_test: tuple
    param_train: tuple  # or None when no ground truth
    param_test: tuple
    config_hash: str
    seed: int

    HEADERS = ("Input melody type",
               "Train/Test for Input vs Plant(learned)",
               "Parameter-Train",
               "Parameter-Test")

    @staticmethod
    def _cell(stat) -> str:
        if stat is None:
            return "n/a"
        mean, var = stat
        return "%.4f (%.3g)" % (mean, var)

    def render_text(self) -> str:
        spec_cell = "%s / %s" % (self._cell(self.spec_train), self._cell(self.spec_test))
        widths = (18, 40, 18, 18)
        row = (self.provenance, spec_cell,
               self._cell(self.param_train), self._cell(self.param_test))
        lines = [
            "Reconstruction and parameter MSE, mean (variance) across %d run(s)."
            % self.n_runs,
            "Spectrogram MSE is computed on the normalized scale stored in the",
            "checkpoint.  config_hash=%s seed=%d" % (self.config_hash, self.seed),
            "",
            " | ".join(h.ljust(w) for h, w in zip(self.HEADERS, widths)),
            "-+-".join("-" * w for w in widths),
            " | ".join(c.ljust(w) for c, w in zip(row, widths)),
        ]
        return "\n".join(lines)

    def to_csv(self) -> str:
        def num(stat, which):
            return "" if stat is None else "%.17g" % stat[which]

        header = ("input_melody_type,spec_mse_train_mean,spec_mse_train_var,"
                  "spec_mse_test_mean,spec_mse_test_var,param_mse_train_mean,"
                  "param_mse_train_var,param_mse_test_mean,param_mse_test_var,"
                  "config_hash,seed,n_runs")
        row = ",".join([
            self.provenance,
            num(self.spec_train, 0), num(self.spec_train, 1),
            num(self.spec_test, 0), num(self.spec_test, 1),
            num(self.param_train, 0), num(self.param_train, 1),
            num(self.param_test, 0), num(self.param_test, 1),
            self.config_hash, str(self.seed), str(self.n_runs),
        ])
        return header + "\n" + row + "\n"


def _mean_var(values) -> tuple:
    arr = np.asarray(values, dtype=np.float64)
    # population variance: a single run reports 0, not NaN
    return float(arr.mean()), float(arr.var())


def evaluate(states, train_ds, test_ds, plant, frontend) -> MetricsReport:
    """Aggregate metrics for one or more trained states (checkpoints)."""
    if not states:
        raise ValueError("need at least one trained state")
    spec_train, spec_test, par_train, par_test = [], [], [], []
    for st in states:
        spec_train.append(reconstruction_mse(st, train_ds, plant, frontend).mean())
        spec_test.append(reconstruction_mse(st, test_ds, plant, frontend).mean())
        if train_ds.has_truth():
            par_train.append(parameter_mse(st, train_ds))
        if test_ds.has_truth():
            par_test.append(parameter_mse(st, test_ds))
    return MetricsReport(
        provenance=test_ds.provenance,
        n_runs=len(states),
        spec_train=_mean_var(spec_train),
        spec_test=_mean_var(spec_test),
        param_train=_mean_var(par_train) if par_train else None,
        param_test=_mean_var(par_test) if par_test else None,
        config_hash=states[0].config_hash,
        seed=states[0].seed,
    )
