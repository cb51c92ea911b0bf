"""Deep Q-network with experience replay and a periodically synced target net."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import Mlp
from .optim import Adam
from .ppo import Env
from .replay import Experience, ReplayBuffer


@dataclass
class DqnConfig:
    gamma: float = 0.95
    epsilon: float = 0.1
    lr: float = 1e-3
    target_sync: int = 100  # gradient steps between hard copies
    batch_size: int = 32
    capacity: int = 10_000
    hidden: tuple[int, ...] = (50, 50, 50, 50, 50)
    hidden_activation: str = "relu"

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.target_sync <= 0 or self.batch_size <= 0:
            raise ValueError("target_sync and batch_size must be positive")


def dqn_td_target(reward, next_state, gamma: float, target_net: Mlp):
    """Bellman target; every transition is treated as non-terminal."""
    q_next = target_net.forward(next_state)
    return reward + gamma * q_next.max(axis=-1)


def select_action_dqn(q_values, epsilon: float, rng: np.random.Generator) -> int:
    q = np.asarray(q_values)
    if q.size == 0:
        raise ValueError("no actions")
    if rng.random() < epsilon:
        return int(rng.integers(q.size))
    return int(np.argmax(q))  # first maximum on ties


def dqn_loss(q_net: Mlp, target_net: Mlp, batch: list[Experience], gamma: float):
    """Mean squared TD error on a minibatch and its gradient w.r.t. ``q_net``."""
    s = np.stack([e.state for e in batch])
    a = np.array([e.action for e in batch])
    r = np.array([e.reward for e in batch], dtype=np.float64)
    s2 = np.stack([e.next_state for e in batch])
    y = dqn_td_target(r, s2, gamma, target_net)
    q, cache = q_net.forward_cached(s)
    rows = np.arange(len(batch))
    err = q[rows, a] - y
    loss = float(np.mean(err**2))
    upstream = np.zeros_like(q)
    upstream[rows, a] = 2.0 * err / len(batch)
    return loss, q_net.backward(cache, upstream)


class DqnAgent:
    def __init__(self, obs_dim: int, n_actions: int, cfg: DqnConfig | None = None, seed: int = 0):
        self.cfg = cfg or DqnConfig()
        init_rng, self.rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
        sizes = (obs_dim,) + tuple(self.cfg.hidden) + (n_actions,)
        self.q = Mlp.create(sizes, self.cfg.hidden_activation, "linear", init_rng)
        self.target = self.q.copy()
        self.buffer = ReplayBuffer(self.cfg.capacity)
        self._opt = Adam(self.q.params(), self.cfg.lr)
        self.grad_steps = 0
        self.skipped = 0

    @property
    def n_actions(self) -> int:
        return self.q.sizes[-1]

    def act(self, state: np.ndarray) -> int:
        return select_action_dqn(self.q.forward(state), self.cfg.epsilon, self.rng)

    def greedy(self, state: np.ndarray) -> int:
        return int(np.argmax(self.q.forward(state)))

    def observe(self, state, action: int, reward: float, next_state) -> None:
        self.buffer.push(Experience(np.asarray(state, dtype=np.float64), int(action), float(reward),
                                    np.asarray(next_state, dtype=np.float64)))

    def sync_target(self) -> None:
        self.target.load_params(self.q)

    def update(self) -> float | None:
        """One Adam step on a replay minibatch; None (and counted) when the buffer is too small."""
        if len(self.buffer) < self.cfg.batch_size:
            self.skipped += 1
            return None
        batch = self.buffer.sample(self.cfg.batch_size, self.rng)
        loss, grads = dqn_loss(self.q, self.target, batch, self.cfg.gamma)
        self._opt.step(grads)
        self.grad_steps += 1
        if self.grad_steps % self.cfg.target_sync == 0:
            self.sync_target()
        return loss


def dqn_update(agent: DqnAgent) -> float | None:
    return agent.update()


def train_dqn(env: Env, steps: int, cfg: DqnConfig | None = None, seed: int = 0) -> DqnAgent:
    agent = DqnAgent(env.observation_dim, env.n_actions, cfg, seed)
    state = env.reset()
    for _ in range(steps):
        a = agent.act(state)
        nxt, r = env.step(a)
        agent.observe(state, a, r, nxt)
        agent.update()
        state = nxt
    return agent
