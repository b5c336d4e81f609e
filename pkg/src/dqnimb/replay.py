"""Fixed-capacity experience replay with uniform random sampling.

Preallocated ring buffer: push is O(1) and eviction is strictly oldest-first.
Sampling is uniform with replacement over the current contents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayMemory:
    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise InputError("replay capacity must be >= 1")
        if state_dim < 1:
            raise InputError("state_dim must be >= 1")
        self.capacity = int(capacity)
        self.state_dim = int(state_dim)
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._terminals = np.zeros(capacity, dtype=bool)
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, t: Transition) -> None:
        state = np.asarray(t.state, dtype=np.float64)
        next_state = np.asarray(t.next_state, dtype=np.float64)
        if state.shape != (self.state_dim,) or next_state.shape != (self.state_dim,):
            raise InputError(f"transition states must have shape ({self.state_dim},)")
        i = self._cursor
        self._states[i] = state
        self._actions[i] = t.action
        self._rewards[i] = t.reward
        self._next_states[i] = next_state
        self._terminals[i] = t.terminal
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _draw(self, k: int, rng: np.random.Generator) -> np.ndarray:
        if self._size == 0:
            raise InputError("cannot sample from an empty replay memory")
        if k < 1:
            raise InputError("sample size must be >= 1")
        return rng.integers(0, self._size, size=k)

    def _logical(self, idx: np.ndarray) -> np.ndarray:
        # logical index 0 = oldest entry still stored
        if self._size < self.capacity:
            return idx
        return (self._cursor + idx) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list[Transition]:
        """k transitions drawn uniformly with replacement."""
        phys = self._logical(self._draw(k, rng))
        return [
            Transition(
                self._states[i].copy(),
                int(self._actions[i]),
                float(self._rewards[i]),
                self._next_states[i].copy(),
                bool(self._terminals[i]),
            )
            for i in phys
        ]

    def sample_arrays(
        self, k: int, rng: np.random.Generator
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Batched view of sample() for the training loop: (states, actions,
        rewards, next_states, terminals)."""
        phys = self._logical(self._draw(k, rng))
        return (
            self._states[phys],
            self._actions[phys],
            self._rewards[phys],
            self._next_states[phys],
            self._terminals[phys],
        )

    def contents(self) -> list[Transition]:
        """Stored transitions, oldest first (test and inspection helper)."""
        order = self._logical(np.arange(self._size))
        return [
            Transition(
                self._states[i].copy(),
                int(self._actions[i]),
                float(self._rewards[i]),
                self._next_states[i].copy(),
                bool(self._terminals[i]),
            )
            for i in order
        ]
