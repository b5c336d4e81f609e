"""Master-seed fan-out.

One experiment seed drives every source of randomness: data synthesis and
subsampling, epoch shuffles, weight initialization, epsilon-greedy
exploration, replay sampling, validation splits, resampling and batch
shuffles. Each component draws from its own stream derived from
(master_seed, component id), so adding draws to one component never perturbs
another and each component is independently reproducible.
"""
from __future__ import annotations

import numpy as np

# Fixed component ids. Append only; renumbering breaks reproducibility of
# existing configs.
COMPONENTS = {
    "train-data": 0,
    "test-data": 1,
    "subsample": 2,
    "env-shuffle": 3,
    "weight-init": 4,
    "explore": 5,
    "replay-sample": 6,
    "val-split": 7,
    "resample": 8,
    "batch-shuffle": 9,
}


def component_sequence(master_seed: int, component: str) -> np.random.SeedSequence:
    if component not in COMPONENTS:
        raise KeyError(f"unknown rng component {component!r}; known: {sorted(COMPONENTS)}")
    return np.random.SeedSequence(master_seed, spawn_key=(COMPONENTS[component],))


def component_rng(master_seed: int, component: str) -> np.random.Generator:
    """Independent generator for one named component of a seeded run."""
    return np.random.default_rng(component_sequence(master_seed, component))


def component_seed(master_seed: int, component: str) -> int:
    """A plain integer seed derived for one component (for APIs that take ints)."""
    return int(component_sequence(master_seed, component).generate_state(1)[0])
