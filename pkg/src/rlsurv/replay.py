"""Fixed-capacity experience replay with uniform sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgument, NotReady

DEFAULT_CAPACITY = 10_000


@dataclass(frozen=True)
class Transition:
    state: tuple
    action: int
    reward: float
    next_state: tuple
    terminal: bool = False


class Batch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    def __len__(self):
        return len(self.actions)

    @classmethod
    def from_transitions(cls, transitions) -> "Batch":
        return cls(np.array([t.state for t in transitions], dtype=np.float64),
                   np.array([t.action for t in transitions], dtype=np.int64),
                   np.array([t.reward for t in transitions], dtype=np.float64),
                   np.array([t.next_state for t in transitions], dtype=np.float64),
                   np.array([t.terminal for t in transitions], dtype=bool))

    def transitions(self) -> list:
        return [Transition(tuple(s), int(a), float(r), tuple(s2), bool(d))
                for s, a, r, s2, d in zip(*self)]


class ReplayBuffer:
    """Ring buffer of transitions stored column-wise in numpy arrays.

    Once ``capacity`` is reached each push overwrites the oldest entry.
    Sampling is uniform with replacement and driven by a private seeded
    generator, so identical seeds give identical sample sequences.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY, n_features: int = 4, seed=None):
        if capacity < 1:
            raise InvalidArgument("capacity must be positive")
        self.capacity = int(capacity)
        self.n_features = int(n_features)
        self.rng = np.random.default_rng(seed)
        self.write_index = 0
        self.size = 0
        self._states = np.zeros((capacity, n_features))
        self._next_states = np.zeros((capacity, n_features))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._terminals = np.zeros(capacity, dtype=bool)

    def __len__(self):
        return self.size

    def push(self, t: Transition) -> None:
        if t.action not in (0, 1):
            raise InvalidArgument(f"action must be 0 or 1, got {t.action!r}")
        if not math.isfinite(t.reward):
            raise InvalidArgument(f"reward must be finite, got {t.reward!r}")
        if len(t.state) != self.n_features or len(t.next_state) != self.n_features:
            raise InvalidArgument(f"states must have {self.n_features} features")
        i = self.write_index
        self._states[i] = t.state
        self._next_states[i] = t.next_state
        self._actions[i] = t.action
        self._rewards[i] = t.reward
        self._terminals[i] = t.terminal
        self.write_index = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _gather(self, idx) -> Batch:
        return Batch(self._states[idx], self._actions[idx], self._rewards[idx],
                     self._next_states[idx], self._terminals[idx])

    def sample_batch(self, batch_size: int) -> Batch:
        if batch_size < 1:
            raise InvalidArgument("batch_size must be at least 1")
        if self.size < batch_size:
            raise NotReady(f"buffer holds {self.size} transitions, batch needs {batch_size}")
        return self._gather(self.rng.integers(0, self.size, size=batch_size))

    def sample(self, batch_size: int) -> list:
        return self.sample_batch(batch_size).transitions()

    def contents(self) -> list:
        """Stored transitions, oldest first."""
        start = self.write_index if self.size == self.capacity else 0
        idx = (start + np.arange(self.size)) % self.capacity
        return self._gather(idx).transitions()
