"""Deep Q-learning for the classification decision process.

Training interleaves environment interaction with one replayed mini-batch
update per step: epsilon-greedy action on the current sample, store the
transition, sample a batch uniformly from replay, regress the taken actions'
Q-values onto their TD targets (reward alone on terminal transitions, reward
plus discounted max next-state value otherwise), one Adam step. TD targets
come from the current online network. Epsilon decays linearly in the global
interaction step.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import nn
from .data import Dataset, require_both_classes
from .env import ClassifyEnv, EnvConfig
from .errors import InputError
from .replay import ReplayMemory, Transition
from .seeding import component_rng


@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.1
    total_steps: int = 120_000
    replay_capacity: int = 50_000
    batch_size: int = 64
    lr: float = 0.00025
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_decay_steps: int | None = None  # defaults to 20% of total_steps
    warmup_steps: int = 1_000
    hidden_sizes: tuple[int, ...] = (256,)
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.gamma <= 1:
            raise InputError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.epsilon_start >= self.epsilon_end >= 0:
            raise InputError("need epsilon_start >= epsilon_end >= 0")
        if self.batch_size < 1 or self.total_steps < 1 or self.replay_capacity < 1:
            raise InputError("batch_size, total_steps and replay_capacity must be >= 1")
        if self.lr <= 0:
            raise InputError("learning rate must be > 0")
        if self.epsilon_decay_steps is not None and self.epsilon_decay_steps < 1:
            raise InputError("epsilon_decay_steps must be >= 1")
        if self.warmup_steps < 0:
            raise InputError("warmup_steps must be >= 0")

    @property
    def decay_steps(self) -> int:
        return self.epsilon_decay_steps if self.epsilon_decay_steps is not None else max(
            1, self.total_steps // 5
        )


@dataclass
class TrainingHistory:
    """Per-step log plus per-episode returns; exportable as CSV with columns
    step, episode, epsilon, loss, episode_return."""

    steps: list[int] = field(default_factory=list)
    episodes: list[int] = field(default_factory=list)
    epsilons: list[float] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)  # nan before learning starts
    episode_returns: list[float] = field(default_factory=list)
    episode_end_steps: list[int] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        ends = dict(zip(self.episode_end_steps, self.episode_returns))
        with Path(path).open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "episode", "epsilon", "loss", "episode_return"])
            for step, ep, eps, loss in zip(self.steps, self.episodes, self.epsilons, self.losses):
                writer.writerow(
                    [
                        step,
                        ep,
                        repr(eps),
                        "" if math.isnan(loss) else repr(loss),
                        repr(ends[step]) if step in ends else "",
                    ]
                )


@dataclass
class TrainedPolicy:
    q_network: nn.DenseNet
    history: TrainingHistory
    config: AgentConfig
    env_config: EnvConfig

    def __post_init__(self):
        if self.q_network.output_dim != 2:
            raise InputError("policy network must have exactly 2 outputs")


def epsilon_at(step: int, cfg: AgentConfig) -> float:
    """Linear decay from epsilon_start at step 0 to epsilon_end at
    cfg.decay_steps, constant afterwards."""
    if step < 0:
        raise InputError("step must be >= 0")
    frac = min(step / cfg.decay_steps, 1.0)
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac


def select_action(q_row: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy over two actions; greedy ties break to the lower index."""
    if not 0 <= epsilon <= 1:
        raise InputError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(0, 2))
    return int(np.argmax(q_row))


def td_target(reward: float, terminal: bool, next_q: np.ndarray, gamma: float) -> float:
    """Target Q-value: the bare reward on terminal transitions, otherwise
    reward + gamma * max next-state Q."""
    if not (np.isfinite(reward) and np.all(np.isfinite(next_q))):
        raise InputError("td_target inputs must be finite")
    if terminal:
        return float(reward)
    return float(reward + gamma * np.max(next_q))


def reward_mass_ratio(dataset: Dataset, lam: float) -> float:
    """Ratio of the minority class's immediate-reward coefficient mass to the
    majority class's in the Q-loss gradient: |D_P| / (lambda * |D_N|).
    Equals 1 exactly when lambda matches the imbalance ratio."""
    if lam <= 0:
        raise InputError(f"lambda must be > 0, got {lam}")
    require_both_classes(dataset)
    return dataset.minority_count() / (lam * dataset.majority_count())


def train(dataset: Dataset, cfg: AgentConfig, env_cfg: EnvConfig) -> TrainedPolicy:
    """Run the interaction/update loop for cfg.total_steps steps."""
    require_both_classes(dataset)
    rng_explore = component_rng(cfg.seed, "explore")
    rng_replay = component_rng(cfg.seed, "replay-sample")
    env_rng = (
        None if env_cfg.shuffle_seed is not None else component_rng(cfg.seed, "env-shuffle")
    )
    env = ClassifyEnv(dataset, env_cfg, rng=env_rng)

    net = nn.init_dense([dataset.dim, *cfg.hidden_sizes, 2], component_rng(cfg.seed, "weight-init"))
    adam = nn.AdamState.for_net(net, lr=cfg.lr)
    memory = ReplayMemory(cfg.replay_capacity, dataset.dim)
    history = TrainingHistory()

    state = env.reset()
    episode = 0
    episode_return = 0.0
    learn_after = max(cfg.warmup_steps, 1)

    for step in range(cfg.total_steps):
        eps = epsilon_at(step, cfg)
        q_row = nn.forward(net, state[None, :])[0]
        action = select_action(q_row, eps, rng_explore)
        r, terminal, next_state = env.step(action)
        memory.push(Transition(state, action, r, next_state, terminal))
        episode_return += r

        loss = math.nan
        if len(memory) >= learn_after:
            states, actions, rewards, next_states, terminals = memory.sample_arrays(
                cfg.batch_size, rng_replay
            )
            next_q = nn.forward(net, next_states)
            targets = rewards + cfg.gamma * next_q.max(axis=1) * ~terminals
            loss_sum, grads = nn.backward_q_mse(net, states, actions, targets)
            nn.adam_step(net, nn.scale_grads(grads, 1.0 / cfg.batch_size), adam)
            loss = loss_sum / cfg.batch_size

        history.steps.append(step)
        history.episodes.append(episode)
        history.epsilons.append(eps)
        history.losses.append(loss)

        if terminal:
            history.episode_returns.append(episode_return)
            history.episode_end_steps.append(step)
            episode += 1
            episode_return = 0.0
            state = env.reset()
        else:
            state = next_state

    return TrainedPolicy(net, history, cfg, env_cfg)


def predict(policy: TrainedPolicy, x: np.ndarray) -> int:
    """Greedy label for one sample; ties resolve to label 0."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (policy.q_network.input_dim,):
        raise InputError(f"expected a feature vector of length {policy.q_network.input_dim}")
    return int(np.argmax(nn.forward(policy.q_network, x[None, :])[0]))


def predict_batch(policy: TrainedPolicy, batch: np.ndarray) -> np.ndarray:
    """Row-wise greedy labels; equals mapping predict() over the rows."""
    return np.argmax(nn.forward(policy.q_network, batch), axis=1)


def save_checkpoint(policy: TrainedPolicy, path: str | Path, extra_metadata: dict | None = None) -> None:
    """Network JSON plus a metadata block (method, config, seed, lambda)."""
    cfg = asdict(policy.config)
    cfg["hidden_sizes"] = list(policy.config.hidden_sizes)
    meta = {
        "method": "DQNimb",
        "config": cfg,
        "seed": policy.config.seed,
        "lambda": policy.env_config.lam,
    }
    if extra_metadata:
        meta.update(extra_metadata)
    payload = {"network": nn.network_to_dict(policy.q_network), "metadata": meta}
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1))


def load_checkpoint(path: str | Path) -> tuple[nn.DenseNet, dict]:
    obj = json.loads(Path(path).read_text())
    return nn.network_from_dict(obj["network"]), obj["metadata"]
