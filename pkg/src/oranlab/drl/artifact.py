"""Versioned model files: ``PNDR1`` magic line followed by canonical JSON.

Every float is stored as its shortest round-tripping decimal string, so a
save/load cycle reproduces the weights bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .autoencoder import EncoderModel
from .mlp import Mlp

MAGIC = b"PNDR1\n"
FORMAT_VERSION = 1


class ArtifactError(ValueError):
    pass


def _floats(a: np.ndarray) -> list[str]:
    return [repr(float(x)) for x in np.asarray(a, dtype=np.float64).ravel()]


def _unfloats(items: list[str], shape: tuple[int, ...]) -> np.ndarray:
    arr = np.array([float(x) for x in items], dtype=np.float64)
    if arr.size != int(np.prod(shape)):
        raise ArtifactError(f"expected {int(np.prod(shape))} values, got {arr.size}")
    return arr.reshape(shape)


def mlp_to_obj(net: Mlp) -> dict[str, Any]:
    return {
        "sizes": list(net.sizes),
        "activations": list(net.activations),
        "weights": [_floats(w) for w in net.weights],
        "biases": [_floats(b) for b in net.biases],
    }


def mlp_from_obj(obj: dict[str, Any]) -> Mlp:
    sizes = obj["sizes"]
    ws = [_unfloats(w, (i, o)) for w, i, o in zip(obj["weights"], sizes[:-1], sizes[1:])]
    bs = [_unfloats(b, (o,)) for b, o in zip(obj["biases"], sizes[1:])]
    return Mlp(ws, bs, tuple(obj["activations"]))


@dataclass
class PolicyModel:
    """A trained agent as deployed: policy net, frozen encoder, and metadata.

    ``net`` outputs logits (PPO) or Q-values (DQN); inference takes the
    argmax in both cases.
    """

    algorithm: str
    net: Mlp
    encoder: EncoderModel | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def act(self, observation: np.ndarray) -> int:
        return int(np.argmax(self.net.forward(observation)))

    def to_bytes(self) -> bytes:
        body: dict[str, Any] = {
            "format": FORMAT_VERSION,
            "algorithm": self.algorithm,
            "net": mlp_to_obj(self.net),
            "metadata": self.metadata,
        }
        if self.encoder is not None:
            body["encoder"] = _encoder_obj(self.encoder)
        text = json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)
        return MAGIC + text.encode("utf-8")

    @classmethod
    def from_bytes(cls, data: bytes) -> "PolicyModel":
        if not data.startswith(MAGIC):
            raise ArtifactError("not a model file (bad magic)")
        try:
            body = json.loads(data[len(MAGIC) :].decode("utf-8"))
            if body.get("format") != FORMAT_VERSION:
                raise ArtifactError(f"unsupported format {body.get('format')!r}")
            enc = _encoder_from(body["encoder"]) if "encoder" in body else None
            return cls(body["algorithm"], mlp_from_obj(body["net"]), enc, body.get("metadata", {}))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ArtifactError):
                raise
            raise ArtifactError(f"corrupt model file: {exc}") from None


def _encoder_obj(enc: EncoderModel) -> dict[str, Any]:
    return {"net": mlp_to_obj(enc.encoder), "lo": _floats(enc.lo), "hi": _floats(enc.hi)}


def _encoder_from(e: dict[str, Any]) -> EncoderModel:
    m = len(e["lo"])
    return EncoderModel(mlp_from_obj(e["net"]), _unfloats(e["lo"], (m,)), _unfloats(e["hi"], (m,)))


def encoder_to_bytes(enc: EncoderModel) -> bytes:
    """A stand-alone frozen encoder, used to share one encoder between agents."""
    body = {"format": FORMAT_VERSION, "algorithm": "autoencoder", "encoder": _encoder_obj(enc)}
    return MAGIC + json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def encoder_from_bytes(data: bytes) -> EncoderModel:
    if not data.startswith(MAGIC):
        raise ArtifactError("not a model file (bad magic)")
    try:
        body = json.loads(data[len(MAGIC) :].decode("utf-8"))
        if body.get("format") != FORMAT_VERSION or body.get("algorithm") != "autoencoder":
            raise ArtifactError("not an encoder artifact")
        return _encoder_from(body["encoder"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ArtifactError):
            raise
        raise ArtifactError(f"corrupt encoder file: {exc}") from None


def save_model(model: PolicyModel) -> bytes:
    return model.to_bytes()


def load_model(data: bytes) -> PolicyModel:
    return PolicyModel.from_bytes(data)
