"""Autoencoder that compresses a K x M KPM window into an M-vector.

Only the encoder half is used after training; it stays frozen while agents
train on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import Mlp
from .optim import Adam

WINDOW_K = 10
# Column order inside every window.
WINDOW_KPIS = ("dl_buffer", "dl_brate", "dl_tx_pkts")
WINDOW_M = len(WINDOW_KPIS)
ENCODER_SIZES = (WINDOW_K * WINDOW_M, 256, 128, 32, WINDOW_M)


@dataclass
class EncoderModel:
    encoder: Mlp
    lo: np.ndarray  # per-KPI minimum over the training data
    hi: np.ndarray
    decoder: Mlp | None = None
    loss_curve: list[float] = field(default_factory=list)

    def normalize(self, window: np.ndarray) -> np.ndarray:
        w = np.asarray(window, dtype=np.float64)
        if w.shape[-2:] != (WINDOW_K, WINDOW_M):
            raise ValueError(f"window must be {WINDOW_K}x{WINDOW_M}, got {w.shape}")
        span = np.where(self.hi > self.lo, self.hi - self.lo, 1.0)
        # Clipped so that out-of-range live KPMs cannot push relu units far
        # outside what the encoder saw during training.
        return np.clip((w - self.lo) / span, 0.0, 1.0)

    def encode_normalized(self, norm: np.ndarray) -> np.ndarray:
        flat = norm.reshape(*norm.shape[:-2], WINDOW_K * WINDOW_M)
        return self.encoder.forward(flat)

    def encode(self, window: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
        """Latent of a raw window. ``mask`` (length M) zeroes unobserved KPI columns."""
        norm = self.normalize(window)
        if mask is not None:
            norm = norm * np.asarray(mask, dtype=np.float64)
        return self.encode_normalized(norm)

    def reconstruction_mse(self, windows: np.ndarray) -> float:
        if self.decoder is None:
            raise ValueError("no decoder attached")
        norm = self.normalize(windows)
        flat = norm.reshape(len(norm), -1)
        rec = self.decoder.forward(self.encoder.forward(flat))
        return float(np.mean((rec - flat) ** 2))


def encode_window(enc: EncoderModel, window: np.ndarray) -> np.ndarray:
    return enc.encode(window)


def fit_bounds(windows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(windows, dtype=np.float64).reshape(-1, WINDOW_M)
    return w.min(axis=0), w.max(axis=0)


def untrained_encoder(seed: int = 0, lo=None, hi=None) -> EncoderModel:
    rng = np.random.default_rng(seed)
    enc = Mlp.create(ENCODER_SIZES, hidden="relu", output="linear", rng=rng)
    dec = Mlp.create(ENCODER_SIZES[::-1], hidden="relu", output="linear", rng=rng)
    lo = np.zeros(WINDOW_M) if lo is None else np.asarray(lo, dtype=np.float64)
    hi = np.ones(WINDOW_M) if hi is None else np.asarray(hi, dtype=np.float64)
    return EncoderModel(enc, lo, hi, dec)


def train_autoencoder(
    dataset: np.ndarray,
    epochs: int = 50,
    lr: float = 1e-3,
    batch_size: int = 64,
    seed: int = 0,
) -> EncoderModel:
    """Fit encoder+decoder on raw windows of shape (N, K, M) by minibatch MSE."""
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim != 3 or len(data) == 0:
        raise ValueError("dataset must be a non-empty (N, K, M) array")
    lo, hi = fit_bounds(data)
    model = untrained_encoder(seed, lo, hi)
    assert model.decoder is not None
    x = model.normalize(data).reshape(len(data), -1)
    opt = Adam(model.encoder.params() + model.decoder.params(), lr)
    rng = np.random.default_rng(seed + 1)
    for _ in range(epochs):
        order = rng.permutation(len(x))
        total = 0.0
        for start in range(0, len(x), batch_size):
            xb = x[order[start : start + batch_size]]
            z, c_enc = model.encoder.forward_cached(xb)
            rec, c_dec = model.decoder.forward_cached(z)
            diff = rec - xb
            total += float(np.sum(diff**2))
            d_rec = 2.0 * diff / diff.size
            g_dec, dz = model.decoder.backward_full(c_dec, d_rec)
            g_enc = model.encoder.backward(c_enc, dz)
            opt.step(g_enc + g_dec)
        model.loss_curve.append(total / x.size)
    return model

