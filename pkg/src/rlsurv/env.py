"""
Labeled rows as an episodic decision problem.

Each step shows the agent one sensor row; the agent answers NORMAL (0) or
FAILURE (1) and is paid according to whether it matched the label. One
episode is one pass over the rows in a (by default reshuffled) order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import InvalidArgument, InvalidState

REWARD_SCHEMES = ("balanced", "unit")


@dataclass(frozen=True)
class EnvConfig:
    reward_scheme: str = "balanced"
    minority_weight: float | None = None  # None: n_majority / n_minority
    shuffle_each_episode: bool = True
    episode_length: int | None = None  # None: every row once
    seed: int = 0

    def __post_init__(self):
        if self.reward_scheme not in REWARD_SCHEMES:
            raise InvalidArgument(
                f"reward_scheme must be one of {REWARD_SCHEMES}, got {self.reward_scheme!r}")
        if self.minority_weight is not None and not self.minority_weight > 0:
            raise InvalidArgument("minority_weight must be positive")
        if self.episode_length is not None and self.episode_length < 1:
            raise InvalidArgument("episode_length must be at least 1")


def reward_for(action: int, label: int, scheme: str = "balanced",
               minority_weight: float = 1.0) -> float:
    """+magnitude when ``action == label``, -magnitude otherwise.

    The magnitude is ``minority_weight`` for FAILURE rows under the balanced
    scheme and 1 in every other case.
    """
    magnitude = minority_weight if (scheme == "balanced" and label == 1) else 1.0
    return magnitude if action == label else -magnitude


class ClassificationEnv:
    def __init__(self, data: Dataset, config: EnvConfig = EnvConfig()):
        if len(data) == 0:
            raise InvalidArgument("environment needs at least one row")
        self.data = data
        self.config = config
        self.rows = data.features
        self.labels = data.labels
        n_min = data.n_failure
        n_maj = data.n_normal
        if config.minority_weight is not None:
            self.minority_weight = float(config.minority_weight)
        elif n_min and n_maj:
            self.minority_weight = max(n_maj, n_min) / min(n_maj, n_min)
        else:
            self.minority_weight = 1.0
        length = config.episode_length or len(data)
        if length > len(data):
            raise InvalidArgument(
                f"episode_length {length} exceeds the {len(data)} available rows")
        self.episode_length = length
        self.rng = np.random.default_rng(config.seed)
        self.ordering = np.arange(len(data))
        self.cursor = 0
        self.done = True

    @property
    def current_row(self) -> np.ndarray:
        return self.rows[self.ordering[self.cursor]]

    def reset(self) -> np.ndarray:
        if self.config.shuffle_each_episode:
            self.ordering = self.rng.permutation(len(self.data))
        self.cursor = 0
        self.done = False
        return self.current_row

    def reward_for(self, action: int, label: int) -> float:
        return reward_for(action, label, self.config.reward_scheme, self.minority_weight)

    def step(self, action: int):
        """Returns ``(reward, next_state, done)``.

        On the final step of an episode ``next_state`` repeats the last row.
        """
        if self.done:
            raise InvalidState("episode finished; call reset()")
        if action not in (0, 1):
            raise InvalidArgument(f"action must be 0 or 1, got {action!r}")
        reward = self.reward_for(action, int(self.labels[self.ordering[self.cursor]]))
        if self.cursor + 1 >= self.episode_length:
            self.done = True
            return reward, self.current_row, True
        self.cursor += 1
        return reward, self.current_row, False

    def max_episode_reward(self) -> float:
        """Return collected by a perfect classifier over one full episode."""
        labels = self.labels[self.ordering[:self.episode_length]]
        return float(sum(self.reward_for(int(y), int(y)) for y in labels))
