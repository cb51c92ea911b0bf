"""Proximal policy optimization with a clipped surrogate, value loss and entropy bonus."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .mlp import Mlp
from .optim import Adam


class Env(Protocol):
    observation_dim: int
    n_actions: int

    def reset(self) -> np.ndarray: ...

    def step(self, action: int) -> tuple[np.ndarray, float]: ...


@dataclass
class PpoConfig:
    gamma: float = 0.99
    clip: float = 0.2
    c1: float = 0.5
    c2: float = 0.01
    gae_lambda: float = 0.95
    lr: float = 1e-3
    epochs: int = 4
    minibatch: int = 50
    rollout: int = 100  # decisions per training chunk
    hidden: tuple[int, ...] = (30, 30, 30)
    normalize_advantages: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.clip <= 0:
            raise ValueError("clip must be positive")
        if self.rollout <= 0 or self.minibatch <= 0 or self.epochs <= 0:
            raise ValueError("rollout, minibatch and epochs must be positive")


@dataclass
class Trajectory:
    states: list[np.ndarray] = field(default_factory=list)
    actions: list[int] = field(default_factory=list)
    logps: list[float] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def append(self, state, action: int, logp: float, reward: float, value: float) -> None:
        if not np.isfinite(logp):
            raise ValueError("log-prob must be finite")
        self.states.append(np.asarray(state, dtype=np.float64))
        self.actions.append(int(action))
        self.logps.append(float(logp))
        self.rewards.append(float(reward))
        self.values.append(float(value))

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class PpoBatch:
    states: np.ndarray
    actions: np.ndarray
    old_logp: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def take(self, idx: np.ndarray) -> "PpoBatch":
        return PpoBatch(self.states[idx], self.actions[idx], self.old_logp[idx],
                        self.advantages[idx], self.returns[idx])


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def compute_advantages(
    rewards,
    values,
    last_value: float,
    gamma: float,
    lam: float,
    normalize: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """GAE advantages and bootstrapped discounted returns for one chunk."""
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if len(r) == 0:
        raise ValueError("empty trajectory")
    if v.shape != r.shape:
        raise ValueError("values and rewards must align")
    n = len(r)
    adv = np.empty(n)
    ret = np.empty(n)
    gae = 0.0
    g = float(last_value)
    for t in range(n - 1, -1, -1):
        next_v = v[t + 1] if t + 1 < n else last_value
        delta = r[t] + gamma * next_v - v[t]
        gae = delta + gamma * lam * gae
        adv[t] = gae
        g = r[t] + gamma * g
        ret[t] = g
    if normalize and n > 1:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    return adv, ret


def ppo_clip_term(q, advantage, eps: float):
    """Per-sample clipped surrogate; works elementwise on arrays."""
    q = np.asarray(q, dtype=np.float64)
    a = np.asarray(advantage, dtype=np.float64)
    out = np.minimum(q * a, np.clip(q, 1.0 - eps, 1.0 + eps) * a)
    return float(out) if out.ndim == 0 else out


def ppo_total_objective(
    batch: PpoBatch, actor: Mlp, critic: Mlp, cfg: PpoConfig
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Mean of clip term - c1 * value error + c2 * entropy, with its gradients.

    The old policy enters through ``batch.old_logp``. Gradients are for
    ascent; the update negates them before handing them to Adam.
    """
    n = len(batch.actions)
    logits, cache_a = actor.forward_cached(batch.states)
    logp_all = log_softmax(logits)
    pi = np.exp(logp_all)
    rows = np.arange(n)
    logp = logp_all[rows, batch.actions]
    q = np.exp(logp - batch.old_logp)
    adv = batch.advantages
    clipped = np.clip(q, 1.0 - cfg.clip, 1.0 + cfg.clip)
    surrogate = np.minimum(q * adv, clipped * adv)
    entropy = -(pi * logp_all).sum(axis=1)
    values, cache_c = critic.forward_cached(batch.states)
    v = values[:, 0]
    per_sample = surrogate - cfg.c1 * (v - batch.returns) ** 2 + cfg.c2 * entropy
    objective = float(per_sample.mean())
    if not np.isfinite(objective):
        raise FloatingPointError(
            "non-finite PPO objective: "
            f"surrogate finite={np.isfinite(surrogate).all()}, "
            f"value finite={np.isfinite(v).all()}, entropy finite={np.isfinite(entropy).all()}, "
            f"max ratio={np.nanmax(q) if q.size else 0.0}"
        )

    # d surrogate / d q is A where the unclipped branch is the active minimum, else 0.
    dq = np.where(q * adv <= clipped * adv, adv, 0.0)
    onehot = np.zeros_like(pi)
    onehot[rows, batch.actions] = 1.0
    d_logits = (dq * q)[:, None] * (onehot - pi)
    d_logits += cfg.c2 * (-pi * (logp_all + entropy[:, None]))
    d_logits /= n
    d_v = (-2.0 * cfg.c1 * (v - batch.returns) / n)[:, None]
    return objective, actor.backward(cache_a, d_logits), critic.backward(cache_c, d_v)


def select_action_ppo(actor: Mlp, state: np.ndarray, rng: np.random.Generator) -> tuple[int, float]:
    logp = log_softmax(actor.forward(state))
    cdf = np.cumsum(np.exp(logp))
    a = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    a = min(a, len(logp) - 1)
    return a, float(logp[a])


class PpoAgent:
    def __init__(self, obs_dim: int, n_actions: int, cfg: PpoConfig | None = None, seed: int = 0):
        self.cfg = cfg or PpoConfig()
        init_rng, self.rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
        h = tuple(self.cfg.hidden)
        # Small output layer so the initial policy is close to uniform.
        self.actor = Mlp.create((obs_dim,) + h + (n_actions,), "tanh", "linear", init_rng, output_scale=0.01)
        self.critic = Mlp.create((obs_dim,) + h + (1,), "tanh", "linear", init_rng)
        self._opt_actor = Adam(self.actor.params(), self.cfg.lr)
        self._opt_critic = Adam(self.critic.params(), self.cfg.lr)
        self.updates = 0

    @property
    def n_actions(self) -> int:
        return self.actor.sizes[-1]

    def value(self, state: np.ndarray) -> float:
        return float(self.critic.forward(state)[0])

    def act(self, state: np.ndarray) -> tuple[int, float, float]:
        a, logp = select_action_ppo(self.actor, state, self.rng)
        return a, logp, self.value(state)

    def greedy(self, state: np.ndarray) -> int:
        return int(np.argmax(self.actor.forward(state)))

    def probabilities(self, state: np.ndarray) -> np.ndarray:
        return np.exp(log_softmax(self.actor.forward(state)))

    def update(self, traj: Trajectory, last_value: float) -> float:
        """Several epochs of minibatch ascent on one chunk; returns the last objective."""
        cfg = self.cfg
        adv, ret = compute_advantages(traj.rewards, traj.values, last_value, cfg.gamma,
                                      cfg.gae_lambda, cfg.normalize_advantages)
        batch = PpoBatch(np.stack(traj.states), np.asarray(traj.actions), np.asarray(traj.logps), adv, ret)
        obj = 0.0
        for _ in range(cfg.epochs):
            order = self.rng.permutation(len(traj))
            for start in range(0, len(order), cfg.minibatch):
                mb = batch.take(order[start : start + cfg.minibatch])
                obj, ga, gc = ppo_total_objective(mb, self.actor, self.critic, cfg)
                self._opt_actor.step([-g for g in ga])
                self._opt_critic.step([-g for g in gc])
        self.updates += 1
        return obj


def train_ppo(
    env: Env,
    steps: int,
    cfg: PpoConfig | None = None,
    seed: int = 0,
    on_update: Callable[[int, float], None] | None = None,
) -> PpoAgent:
    """Run ``steps`` decisions in a continuing task, updating after every chunk."""
    agent = PpoAgent(env.observation_dim, env.n_actions, cfg, seed)
    state = env.reset()
    traj = Trajectory()
    for t in range(steps):
        a, logp, v = agent.act(state)
        nxt, r = env.step(a)
        traj.append(state, a, logp, r, v)
        state = nxt
        if len(traj) == agent.cfg.rollout or t == steps - 1:
            obj = agent.update(traj, agent.value(state))
            if on_update is not None:
                on_update(t + 1, obj)
            traj = Trajectory()
    return agent
