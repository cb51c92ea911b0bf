"""Offline training: dataset in the catalog -> encoder -> agent -> model in the catalog."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..catalog import Catalog
from ..drl import (
    DqnAgent,
    DqnConfig,
    EncoderModel,
    PolicyModel,
    PpoConfig,
    encoder_from_bytes,
    encoder_to_bytes,
    train_autoencoder,
    train_ppo,
)
from ..intent import IntentSpec, parse_intent
from ..ransim.kpmcsv import iter_kpm_rows
from ..ric.descriptor import Domain, domain_for_intent_actions
from ..ric.timers import TIMER_SETS
from .datasets import (
    LiveSimEnv,
    ReplayEnv,
    encoder_training_windows,
    group_windows,
    load_segments,
    split_segments,
)
from .scenario import ScenarioConfig

log = logging.getLogger(__name__)

AGENTS = ("ppo", "dqn")
METRICS_COLUMNS = ("step", "mean_reward", "objective")


class TrainingDiverged(RuntimeError):
    code = "diverged"


@dataclass
class TrainResult:
    model_id: str
    intent_id: str
    encoder_id: str
    model: PolicyModel
    metrics: list[dict[str, float]] = field(default_factory=list)

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(METRICS_COLUMNS)
        for row in self.metrics:
            w.writerow([row["step"], repr(row["mean_reward"]), repr(row["objective"])])
        return buf.getvalue()


def intent_bytes(intent: IntentSpec) -> bytes:
    return (json.dumps(intent.to_dict(), sort_keys=True, indent=2) + "\n").encode("utf-8")


def store_intent(catalog: Catalog, intent: IntentSpec, intent_id: str | None = None) -> str:
    data = intent_bytes(intent)
    iid = intent_id or "intent-" + hashlib.sha256(data).hexdigest()[:12]
    catalog.put("intent", iid, data)
    return iid


def _load_intent(intent: IntentSpec | str | Path) -> IntentSpec:
    if isinstance(intent, IntentSpec):
        return intent
    return parse_intent(Path(intent).read_text(encoding="utf-8"))


def dataset_windows(catalog: Catalog, dataset_id: str):
    """Verified windows and segment manifest of a stored dataset."""
    entry = catalog.entry("dataset", dataset_id)
    text = catalog.get("dataset", dataset_id).decode("utf-8")
    windows = group_windows(list(iter_kpm_rows(text)))
    return windows, load_segments(entry.metadata.get("segments"))


def ensure_encoder(
    catalog: Catalog, dataset_id: str, epochs: int = 20, seed: int = 0
) -> tuple[str, EncoderModel]:
    """The dataset's encoder, training and storing it on first use."""
    enc_id = f"{dataset_id}.encoder"
    if catalog.exists("model", enc_id):
        return enc_id, encoder_from_bytes(catalog.get("model", enc_id))
    windows, segments = dataset_windows(catalog, dataset_id)
    data = encoder_training_windows(split_segments(windows, segments))
    enc = train_autoencoder(data, epochs=epochs, seed=seed)
    log.info("encoder for %s: final reconstruction loss %.3g", dataset_id, enc.loss_curve[-1])
    catalog.put("model", enc_id, encoder_to_bytes(enc),
                {"role": "encoder", "dataset": dataset_id, "epochs": epochs, "seed": seed})
    return enc_id, enc


def _make_config(agent: str, overrides: Mapping[str, Any] | None):
    cls = PpoConfig if agent == "ppo" else DqnConfig
    kw = dict(overrides or {})
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(kw) - names
    if unknown:
        raise ValueError(f"unknown {agent} hyperparameters {sorted(unknown)}")
    if "hidden" in kw:
        kw["hidden"] = tuple(kw["hidden"])
    return cls(**kw)


class _Recorder:
    """Passes through to an env and remembers every reward."""

    def __init__(self, env) -> None:
        self.env = env
        self.observation_dim = env.observation_dim
        self.n_actions = env.n_actions
        self.rewards: list[float] = []

    def reset(self):
        return self.env.reset()

    def step(self, a):
        s, r = self.env.step(a)
        if not np.isfinite(r):
            raise TrainingDiverged(f"non-finite reward {r!r} at step {len(self.rewards)}")
        self.rewards.append(r)
        return s, r


def _check_finite(net, what: str) -> None:
    for i, p in enumerate(net.params()):
        if not np.all(np.isfinite(p)):
            raise TrainingDiverged(f"{what} parameter block {i} contains NaN or inf")


def train(
    catalog: Catalog,
    intent: IntentSpec | str | Path,
    dataset_id: str,
    agent: str = "ppo",
    steps: int = 1000,
    overrides: Mapping[str, Any] | None = None,
    *,
    seed: int = 0,
    domain: str | Domain | None = None,
    timer_set: int = 1,
    model_id: str | None = None,
    intent_id: str | None = None,
    encoder_epochs: int = 20,
    log_every: int = 100,
    live_scenario: ScenarioConfig | None = None,
) -> TrainResult:
    """Train an agent for ``intent`` and store it.

    The agent learns against a replay of ``dataset_id``. Passing
    ``live_scenario`` trains against the simulator instead; the encoder
    still comes from the dataset.
    """
    if agent not in AGENTS:
        raise ValueError(f"agent must be one of {AGENTS}")
    if steps <= 0:
        raise ValueError("steps must be positive")
    spec = _load_intent(intent)
    cfg = _make_config(agent, overrides)
    windows, segments = dataset_windows(catalog, dataset_id)
    enc_id, enc = ensure_encoder(catalog, dataset_id, encoder_epochs, seed)
    dom = Domain.parse(domain) if isinstance(domain, str) else domain
    dom = dom or domain_for_intent_actions(spec.action_kinds)
    space = dom.action_space()
    timers = TIMER_SETS[timer_set]

    if live_scenario is not None:
        env = _Recorder(LiveSimEnv(live_scenario.with_(timer_set=timer_set), spec, enc, space))
    else:
        env = _Recorder(ReplayEnv(windows, segments, spec, enc, space, timers.action_update // timers.kpm_log))

    metrics: list[dict[str, float]] = []

    def record(step: int, objective: float) -> None:
        recent = env.rewards[-log_every:] if agent == "dqn" else env.rewards[-cfg.rollout:]
        metrics.append({"step": step, "mean_reward": float(np.mean(recent)), "objective": float(objective)})

    try:
        with np.errstate(over="raise", invalid="raise"):
            if agent == "ppo":
                trained = train_ppo(env, steps, cfg, seed, on_update=record)
                net = trained.actor
                _check_finite(trained.critic, "critic")
            else:
                dqn = DqnAgent(env.observation_dim, env.n_actions, cfg, seed)
                state = env.reset()
                losses: list[float] = []
                for t in range(steps):
                    a = dqn.act(state)
                    nxt, r = env.step(a)
                    dqn.observe(state, a, r, nxt)
                    loss = dqn.update()
                    if loss is not None:
                        losses.append(loss)
                    state = nxt
                    if (t + 1) % log_every == 0 or t == steps - 1:
                        record(t + 1, float(np.mean(losses[-log_every:])) if losses else float("nan"))
                net = dqn.q
    except FloatingPointError as exc:
        raise TrainingDiverged(
            f"{agent} training diverged after {len(env.rewards)} steps: {exc}; "
            f"last rewards {env.rewards[-5:]}"
        ) from None
    _check_finite(net, "policy")

    iid = store_intent(catalog, spec, intent_id)
    ds_entry = catalog.entry("dataset", dataset_id)
    metadata: dict[str, Any] = {
        "algorithm": agent,
        "gamma": cfg.gamma,
        "domain": str(dom),
        "intent_id": iid,
        "dataset_id": dataset_id,
        "dataset_digest": ds_entry.digest,
        "encoder_id": enc_id,
        "steps": steps,
        "seed": seed,
        "timer_set": timer_set,
        "training_env": "live" if live_scenario is not None else "replay",
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(cfg).items()},
    }
    if agent == "dqn":
        metadata["epsilon"] = cfg.epsilon
    model = PolicyModel(agent, net, enc, metadata)
    data = model.to_bytes()
    mid = model_id or f"{agent}-{hashlib.sha256(data).hexdigest()[:12]}"
    catalog.put("model", mid, data, {"algorithm": agent, "domain": str(dom), "intent_id": iid,
                                     "gamma": cfg.gamma})
    return TrainResult(mid, iid, enc_id, model, metrics)
