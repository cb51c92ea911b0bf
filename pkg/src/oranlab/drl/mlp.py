"""Small fully connected networks in float64 with hand-written backprop."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

ACTIVATIONS = ("tanh", "relu", "linear")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0).astype(z.dtype)
    return np.ones_like(z)


@dataclass
class Mlp:
    """``weights[l]`` has shape (in, out); ``activations[l]`` follows layer ``l``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("weights, biases and activations must align")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {l}: bad shapes {w.shape}, {b.shape}")
            if l and self.weights[l - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {l}: input {w.shape[0]} != previous output "
                                 f"{self.weights[l - 1].shape[1]}")
        for a in self.activations:
            if a not in ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")

    @classmethod
    def create(
        cls,
        sizes: Sequence[int],
        hidden: str = "tanh",
        output: str = "linear",
        rng: np.random.Generator | None = None,
        output_scale: float = 1.0,
    ) -> "Mlp":
        """Glorot-uniform weights, zero biases."""
        rng = rng or np.random.default_rng(0)
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        ws, bs = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            ws.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            bs.append(np.zeros(fan_out))
        ws[-1] *= output_scale
        acts = (hidden,) * (len(sizes) - 2) + (output,)
        return cls(ws, bs, acts)

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def params(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.activations)

    def load_params(self, other: "Mlp") -> None:
        for dst, src in zip(self.params(), other.params()):
            dst[...] = src

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_cached(x)[0]

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        a = np.asarray(x, dtype=np.float64)
        single = a.ndim == 1
        if single:
            a = a[None, :]
        if a.shape[-1] != self.weights[0].shape[0]:
            raise ValueError(f"input dim {a.shape[-1]} != {self.weights[0].shape[0]}")
        cache = []
        for w, b, act in zip(self.weights, self.biases, self.activations):
            z = a @ w + b
            out = _act(act, z)
            cache.append((a, z, out))
            a = out
        return (a[0] if single else a), cache

    def backward(self, cache: list, upstream: np.ndarray) -> list[np.ndarray]:
        """Gradients of ``sum(upstream * y)`` w.r.t. params, in ``params()`` order."""
        return self.backward_full(cache, upstream)[0]

    def backward_full(self, cache: list, upstream: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Like :meth:`backward`, also returning the gradient w.r.t. the input."""
        dy = np.asarray(upstream, dtype=np.float64)
        if dy.ndim == 1:
            dy = dy[None, :]
        if dy.shape != cache[-1][2].shape:
            raise ValueError(f"upstream shape {dy.shape} != output {cache[-1][2].shape}")
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))  # type: ignore[list-item]
        for l in range(len(self.weights) - 1, -1, -1):
            a_in, z, out = cache[l]
            dz = dy * _act_grad(self.activations[l], z, out)
            grads[2 * l] = a_in.T @ dz
            grads[2 * l + 1] = dz.sum(axis=0)
            dy = dz @ self.weights[l].T
        return grads, dy


def mlp_forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def mlp_gradients(net: Mlp, x: np.ndarray, upstream_grad: np.ndarray) -> list[np.ndarray]:
    _, cache = net.forward_cached(x)
    return net.backward(cache, upstream_grad)
