"""Tiny environments for checking that the learners learn."""

from __future__ import annotations

from typing import Sequence

import numpy as np


class BanditEnv:
    """Continuing k-armed bandit with a constant observation and fixed payoffs."""

    def __init__(self, payoffs: Sequence[float] = (0.2, 0.5, 1.0)):
        self.payoffs = tuple(float(p) for p in payoffs)
        self.n_actions = len(self.payoffs)
        self.observation_dim = 1
        self._obs = np.ones(1)

    def reset(self) -> np.ndarray:
        return self._obs.copy()

    def step(self, action: int) -> tuple[np.ndarray, float]:
        return self._obs.copy(), self.payoffs[action]
