"""Fixed-capacity FIFO experience buffer."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


class ReplayUnderflow(ValueError):
    pass


class ReplayBuffer:
    def __init__(self, capacity: int = 10_000):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list[Any] = []
        self._head = 0  # slot the next push overwrites once full

    def __len__(self) -> int:
        return len(self._items)

    def push(self, item: Any) -> None:
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._head] = item
            self._head = (self._head + 1) % self.capacity

    def items(self) -> list[Any]:
        """Contents, oldest first."""
        return self._items[self._head :] + self._items[: self._head]

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if batch_size > len(self._items):
            raise ReplayUnderflow(f"need {batch_size} items, have {len(self._items)}")
        return rng.choice(len(self._items), size=batch_size, replace=False)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Any]:
        return [self._items[i] for i in self.sample_indices(batch_size, rng)]


def replay_sample(buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator) -> list[Any]:
    return buffer.sample(batch_size, rng)
