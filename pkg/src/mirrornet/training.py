"""The alternating two-loss training loop.

Each outer iteration trains the decoder first and the encoder second.  The
decoder phase fits decoder(z) to the spectrogram the plant actually produces
for z, using the encoder's current (detached) codes with a fraction replaced
by uniform random "babbling" draws; that keeps the decoder an honest surrogate
of the plant on the codes that matter.  The encoder phase then minimizes the
ordinary autoencoder loss through the frozen decoder, which is the only route
gradients have from the sensory side back to the control space.

Small corpora get two optional aids (see TrainConfig): a floor on the babble
pool, topped up with draws beyond the corpus, and a bounded replay of recent
(code, spectrogram) renders folded into the decoder phase.  Both switch off
after a configurable fraction of training, returning the pool to plain
replacement babbling so the decoder can settle onto the corpus itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .checkpoint import load_checkpoint, restore_model, save_checkpoint
from .config import RunConfig
from .errors import PlantError, TrainingDiverged
from .network import MirrorNet
from .nn import Adam
from .params import MelodyParams
from .tensor import Tensor, mse


@dataclass
class TrainState:
    model: MirrorNet
    opt_enc: Adam
    opt_dec: Adam
    norm_constant: float
    seed: int
    config_dict: dict
    config_hash: str
    e_c_epochs: list = field(default_factory=list)
    e_d_epochs: list = field(default_factory=list)
    e_c_outer: list = field(default_factory=list)
    e_d_outer: list = field(default_factory=list)
    log_rows: list = field(default_factory=list)
    outer_iters_run: int = 0
    converged: bool = False

    def save(self, path):
        save_checkpoint(
            path, self.model, self.opt_enc, self.opt_dec,
            config_dict=self.config_dict, config_hash=self.config_hash,
            seed=self.seed, norm_constant=self.norm_constant,
            outer_iter=self.outer_iters_run,
        )

    def write_log(self, path):
        write_training_log(path, self.log_rows)


LOG_HEADER = "outer_iter,epoch,phase,e_c,e_d,lr_enc,lr_dec"


def write_training_log(path, rows):
    with open(path, "w") as f:
        f.write(LOG_HEADER + "\n")
        for outer, epoch, phase, e_c, e_d, lr_e, lr_d in rows:
            f.write("%d,%d,%s,%s,%s,%.17g,%.17g\n" % (
                outer, epoch, phase,
                "" if e_c is None else "%.17g" % e_c,
                "" if e_d is None else "%.17g" % e_d,
                lr_e, lr_d,
            ))


def _batches(n, batch_size, perm):
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def encode_detached(model: MirrorNet, s_norm: np.ndarray, batch_size: int) -> np.ndarray:
    """Run the encoder without building a graph; returns plain (B, P, N) codes."""
    model.encoder.freeze()
    try:
        chunks = [
            model.encoder(Tensor(s_norm[i:i + batch_size])).data.copy()
            for i in range(0, len(s_norm), batch_size)
        ]
    finally:
        model.encoder.unfreeze()
    return np.concatenate(chunks, axis=0)


def _render_targets(latents, plant, frontend, norm):
    specs = []
    for i, z in enumerate(latents):
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise PlantError(f"latent {i} left [0, 1]; refusing to drive the plant")
        try:
            buf = plant(z)
        except Exception as e:
            raise PlantError(f"plant failed on corpus item {i}: {e}") from e
        specs.append(frontend(buf))
    return np.stack(specs) / norm


def decoder_phase(model, opt_dec, latents, targets, epochs, batch_size, rng):
    """Fit decoder(z) to the plant's spectrograms; returns per-epoch losses."""
    n = len(latents)
    losses = []
    for _ in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        for idx in _batches(n, batch_size, perm):
            zb = Tensor(latents[idx])
            tb = Tensor(targets[idx])
            loss = mse(model.decoder(zb), tb)
            model.decoder.zero_grad()
            loss.backward()
            opt_dec.step()
            total += loss.item() * len(idx)
        losses.append(total / n)
    return losses


def encoder_phase(model, opt_enc, s_norm, epochs, batch_size, rng):
    """Autoencoder loss through the frozen decoder; returns per-epoch losses."""
    n = len(s_norm)
    losses = []
    model.decoder.freeze()
    try:
        for _ in range(epochs):
            perm = rng.permutation(n)
            total = 0.0
            for idx in _batches(n, batch_size, perm):
                sb = Tensor(s_norm[idx])
                recon = model.decoder(model.encoder(sb))
                loss = mse(recon, sb)
                model.encoder.zero_grad()
                loss.backward()
                opt_enc.step()
                total += loss.item() * len(idx)
            losses.append(total / n)
    finally:
        model.decoder.unfreeze()
    return losses


def _improved_less_than(hist, patience, tol):
    if len(hist) <= patience:
        return False
    base = hist[-(patience + 1)]
    if base <= 0.0:
        return True
    return (base - hist[-1]) / base < tol


def train(cfg: RunConfig, spectrograms: np.ndarray, plant, frontend,
          progress=None, checkpoint_dir=None) -> TrainState:
    """Train on a corpus of raw (unnormalized) spectrograms.

    Args:
        cfg: full run configuration; cfg.seed drives everything random.
        spectrograms: (B, channels, frames) array of raw spectrogram values.
        plant: callable mapping a (P, N) latent in [0, 1] to an AudioBuffer.
        frontend: callable mapping an AudioBuffer to raw spectrogram values.
        progress: optional callable(outer_iter, e_c, e_d) for side-channel logs.
        checkpoint_dir: if set, periodic checkpoints land here.

    Raises:
        TrainingDiverged: the encoder loss exceeded the divergence guard.
    """
    tc = cfg.training
    spectrograms = np.asarray(spectrograms, dtype=np.float64)
    if spectrograms.ndim != 3:
        raise ValueError(f"corpus must be (B, C, F), got shape {spectrograms.shape}")
    norm = float(spectrograms.max())
    if norm <= 0.0:
        raise ValueError("corpus is silent; cannot normalize spectrograms")
    s_norm = spectrograms / norm

    rng = np.random.default_rng(cfg.seed)
    model = MirrorNet(cfg.model, rng)
    opt_enc = Adam(model.encoder.parameters(), tc.lr_enc,
                   decay_gamma=tc.lr_decay_gamma, decay_interval=tc.lr_decay_interval)
    opt_dec = Adam(model.decoder.parameters(), tc.lr_dec,
                   decay_gamma=tc.lr_decay_gamma, decay_interval=tc.lr_decay_interval)
    state = TrainState(
        model=model, opt_enc=opt_enc, opt_dec=opt_dec, norm_constant=norm,
        seed=cfg.seed, config_dict=cfg.to_dict(), config_hash=cfg.hash(),
    )

    n = len(s_norm)
    latent_shape = (cfg.model.n_params, cfg.model.n_notes)
    replay_z = np.empty((0,) + latent_shape)
    replay_t = np.empty((0,) + s_norm.shape[1:])
    babble_until = int(round(tc.babble_until_frac * tc.outer_iters))
    e_c_init = None

    for it in range(tc.outer_iters):
        opt_enc.set_epoch(it)
        opt_dec.set_epoch(it)
        exploring = it < babble_until

        # (a) acquire codes, then babble over a subset
        latents = encode_detached(model, s_norm, tc.batch_size)
        rho = tc.babble_rho_first if it == 0 else tc.babble_rho
        n_babble = int(round(rho * n))
        if n_babble:
            which = rng.choice(n, size=n_babble, replace=False)
            latents[which] = rng.uniform(size=(n_babble,) + latent_shape)
        # On small corpora round(rho * n) starves the decoder of babble (it is
        # zero at n = 1), leaving it free to drift into fiction on the codes
        # the encoder actually visits.  Top the pool up to babble_min with
        # extra draws appended after the corpus codes.
        extra = max(tc.babble_min - n_babble, 0) if (rho > 0.0 and exploring) else 0
        if extra:
            latents = np.concatenate(
                [latents, rng.uniform(size=(extra,) + latent_shape)]
            )

        # (b) decoder phase against the plant's actual output; while exploring,
        # recently rendered pairs ride along so the surrogate accumulates
        # plant knowledge beyond this iteration's draws
        targets = _render_targets(latents, plant, frontend, norm)
        if tc.babble_replay and exploring and len(replay_z):
            pool_z = np.concatenate([latents, replay_z])
            pool_t = np.concatenate([targets, replay_t])
        else:
            pool_z, pool_t = latents, targets
        d_losses = decoder_phase(model, opt_dec, pool_z, pool_t,
                                 tc.epochs_dec, tc.batch_size, rng)
        if tc.babble_replay and exploring:
            replay_z = np.concatenate([latents, replay_z])[:tc.babble_replay]
            replay_t = np.concatenate([targets, replay_t])[:tc.babble_replay]
        for ep, e_d in enumerate(d_losses):
            if not np.isfinite(e_d):
                raise TrainingDiverged(f"e_d became {e_d} at iteration {it}, epoch {ep}")
            state.e_d_epochs.append(e_d)
            state.log_rows.append((it, ep, "decoder", None, e_d, opt_enc.lr, opt_dec.lr))

        # (c) encoder phase through the frozen decoder
        c_losses = encoder_phase(model, opt_enc, s_norm,
                                 tc.epochs_enc, tc.batch_size, rng)
        for ep, e_c in enumerate(c_losses):
            if not np.isfinite(e_c):
                raise TrainingDiverged(f"e_c became {e_c} at iteration {it}, epoch {ep}")
            if e_c_init is None:
                e_c_init = e_c
            if e_c > tc.divergence_factor * e_c_init:
                raise TrainingDiverged(
                    f"e_c {e_c:.4g} exceeded {tc.divergence_factor:g} x its initial "
                    f"value {e_c_init:.4g} at iteration {it}, epoch {ep}"
                )
            state.e_c_epochs.append(e_c)
            state.log_rows.append((it, ep, "encoder", e_c, None, opt_enc.lr, opt_dec.lr))

        state.e_d_outer.append(d_losses[-1])
        state.e_c_outer.append(c_losses[-1])
        state.outer_iters_run = it + 1
        if progress is not None:
            progress(it, c_losses[-1], d_losses[-1])
        if checkpoint_dir is not None and tc.checkpoint_interval:
            if (it + 1) % tc.checkpoint_interval == 0:
                state.save(f"{checkpoint_dir}/checkpoint_{it + 1:04d}.bin")

        if (_improved_less_than(state.e_c_outer, tc.patience, tc.convergence_tol)
                and _improved_less_than(state.e_d_outer, tc.patience, tc.convergence_tol)):
            state.converged = True
            break

    return state


# ---------------------------------------------------------------------- #
# inference on a trained model
# ---------------------------------------------------------------------- #
@dataclass
class InferenceState:
    model: MirrorNet
    norm_constant: float
    config: RunConfig
    manifest: dict

    @property
    def config_hash(self) -> str:
        return self.manifest["config_hash"]

    @property
    def seed(self) -> int:
        return self.manifest["seed"]


def load_trained(path) -> InferenceState:
    """Rebuild a model (weights only) from a checkpoint file."""
    manifest, arrays = load_checkpoint(path)
    cfg = RunConfig.from_dict(manifest["config"])
    model = MirrorNet(cfg.model, np.random.default_rng(0))
    restore_model(manifest, arrays, model)
    return InferenceState(model=model, norm_constant=manifest["norm_constant"],
                          config=cfg, manifest=manifest)


def infer_latents(state, raw_specs: np.ndarray, batch_size: int = 20) -> np.ndarray:
    """Raw spectrograms (B, C, F) -> latent codes (B, P, N) in [0, 1]."""
    s_norm = np.asarray(raw_specs, dtype=np.float64) / state.norm_constant
    z = encode_detached(state.model, s_norm, batch_size)
    return np.clip(z, 0.0, 1.0)


def infer_controls(state, raw_spec: np.ndarray, total_duration: float = None) -> MelodyParams:
    """One raw spectrogram (C, F) -> MelodyParams via the encoder."""
    if total_duration is None:
        total_duration = state.config.plant.total_duration
    z = infer_latents(state, np.asarray(raw_spec)[None])[0]
    return MelodyParams.from_latent(z, total_duration)
