"""The imbalanced-classification decision process.

States are training samples visited in a per-episode shuffled order. The
action is a label guess. Rewards are class-sensitive: +1/-1 for a correct or
wrong guess on a minority sample, +lambda/-lambda on a majority sample. An
episode terminates when a minority sample is misclassified or when the epoch
runs out; end-of-epoch transitions are terminal for TD purposes, so values
never bootstrap across the reshuffle boundary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, require_both_classes
from .errors import InputError, ProtocolError


@dataclass(frozen=True)
class EnvConfig:
    lam: float  # majority-class reward magnitude, in (0, 1]
    shuffle_seed: int | None = None

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise InputError(f"lambda must lie in (0, 1], got {self.lam}")


def reward(action: int, true_label: int, is_minority: bool, lam: float) -> float:
    """Four-case class-sensitive reward; depends only on correctness and the
    minority flag, never on feature values."""
    if action not in (0, 1) or true_label not in (0, 1):
        raise InputError("action and true_label must be 0 or 1")
    if not 0 < lam <= 1:
        raise InputError(f"lambda must lie in (0, 1], got {lam}")
    correct = action == true_label
    if is_minority:
        return 1.0 if correct else -1.0
    return lam if correct else -lam


class ClassifyEnv:
    """Stateful cursor over one dataset; single-threaded by design."""

    def __init__(self, dataset: Dataset, config: EnvConfig, rng: np.random.Generator | None = None):
        if not dataset.is_binary or dataset.minority_label is None:
            raise InputError("environment requires a binarized dataset with a minority label")
        require_both_classes(dataset)
        self.dataset = dataset
        self.config = config
        self._rng = rng if rng is not None else np.random.default_rng(config.shuffle_seed)
        self._order: np.ndarray | None = None
        self._position = 0
        self._episode_count = 0
        self._needs_reset = True

    @property
    def epoch_order(self) -> np.ndarray:
        if self._order is None:
            raise ProtocolError("reset() has not been called")
        return self._order.copy()

    @property
    def position(self) -> int:
        return self._position

    @property
    def episode_count(self) -> int:
        return self._episode_count

    def reset(self) -> np.ndarray:
        """Draw a fresh sample order and return the first state's features."""
        if self.dataset.n == 0:
            raise InputError("cannot reset an environment over an empty dataset")
        self._order = self._rng.permutation(self.dataset.n)
        self._position = 0
        self._episode_count += 1
        self._needs_reset = False
        return self.dataset.features[self._order[0]].copy()

    def step(self, action: int) -> tuple[float, bool, np.ndarray]:
        """Classify the current sample; returns (reward, terminal, next_state).

        next_state is a zero vector on terminal transitions; TD targets ignore
        it there, so the value is inert.
        """
        if self._needs_reset or self._order is None:
            raise ProtocolError("step() called before reset() or after a terminal transition")
        if action not in (0, 1):
            raise InputError("action must be 0 or 1")

        idx = self._order[self._position]
        label = int(self.dataset.labels[idx])
        is_minority = label == self.dataset.minority_label
        r = reward(action, label, is_minority, self.config.lam)

        last_of_epoch = self._position == self.dataset.n - 1
        terminal = (is_minority and action != label) or last_of_epoch
        self._position += 1
        if terminal:
            self._needs_reset = True
            next_state = np.zeros(self.dataset.dim)
        else:
            next_state = self.dataset.features[self._order[self._position]].copy()
        return r, terminal, next_state
