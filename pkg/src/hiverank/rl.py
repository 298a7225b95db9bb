"""Episode-based trainer for the imbalanced pair classifier.

Classification is framed as a guessing game: each episode walks the
shuffled dataset, the policy labels one pair per step, and rewards are
asymmetric by class.  Positive pairs (the minority) pay +1/-1, negative
pairs pay +lam/-lam with lam in [0, 1], and a wrong call on a minority
sample ends the episode on the spot.  Updates are Q-learning style: sample
a mini-batch from replay memory, regress the taken actions' values toward
r + gamma * max Q(next) computed with a periodically refreshed target
copy, and take one summed-squared-error gradient step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import EmbeddedDataset
from .encoding import unflatten
from .errors import ConfigError, NumericError, ShapeError, StateError
from .params import ModelConfig, PolicyParams, sgd_step
from .policy import backward, forward, loss_and_gradients, q_values, relevance_scores

Array = np.ndarray


def reward(label: int, action: int, lam: float):
    """(reward, episode_over) for one classification call.

        minority (label 1) correct:  +1,   keep going
        minority wrong:              -1,   episode over
        majority (label 0) correct:  +lam, keep going
        majority wrong:              -lam, keep going

    Only a minority mistake terminates; everything else lets the walk
    continue.
    """
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"lam must be in [0, 1], got {lam}")
    if label == 1:
        return (1.0, False) if action == 1 else (-1.0, True)
    return (lam, False) if action == 0 else (-lam, False)


def epsilon_greedy(q: Array, epsilon: float, rng: np.random.Generator) -> int:
    """Explore uniformly with probability epsilon, otherwise exploit.

    Exact ties in the action values resolve to action 0.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError(f"epsilon must be in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(2))
    return int(q[1] > q[0])


@dataclass
class Transition:
    state: int      # row index into the dataset
    action: int
    reward: float
    next_state: int
    end: bool


class ReplayMemory:
    """Bounded ring of transitions; oldest entries are overwritten first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items = []
        self._cursor = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._cursor] = transition
        self._cursor = (self._cursor + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list:
        """k distinct transitions, uniformly without replacement."""
        if k > len(self._items):
            raise StateError(f"asked for {k} transitions, have {len(self._items)}")
        idx = rng.choice(len(self._items), size=k, replace=False)
        return [self._items[i] for i in idx]


@dataclass
class TrainConfig:
    episodes: int = 200
    lam: float = 0.5
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_fraction: float = 0.3
    batch_size: int = 128
    learning_rate: float = 1e-3
    replay_capacity: int = 10_000
    target_refresh: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lam must be in [0, 1], got {self.lam}")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.episodes < 1:
            raise ConfigError(f"episodes must be >= 1, got {self.episodes}")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ConfigError("need 1 <= batch_size <= replay_capacity")
        if self.target_refresh < 1:
            raise ConfigError("target_refresh must be >= 1")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if not 0.0 < self.epsilon_decay_fraction <= 1.0:
            raise ConfigError("epsilon_decay_fraction must be in (0, 1]")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "episodes", "lam", "gamma", "epsilon_start", "epsilon_end",
            "epsilon_decay_fraction", "batch_size", "learning_rate",
            "replay_capacity", "target_refresh", "seed")}


def epsilon_schedule(cfg: TrainConfig, episode: int) -> float:
    """Linear ramp from epsilon_start to epsilon_end over the first
    decay-fraction of episodes, flat afterwards."""
    ramp = max(1, int(round(cfg.epsilon_decay_fraction * cfg.episodes)))
    if episode >= ramp:
        return cfg.epsilon_end
    t = episode / ramp
    return cfg.epsilon_start + t * (cfg.epsilon_end - cfg.epsilon_start)


@dataclass
class EpisodeRecord:
    episode: int
    steps: int
    cumulative_reward: float
    mean_loss: float
    epsilon: float


@dataclass
class TrainResult:
    params: PolicyParams
    episodes: list
    gradient_steps: int
    transitions: list = field(default_factory=list)  # only when kept


def _as_params(init, cfg: ModelConfig) -> PolicyParams:
    if isinstance(init, PolicyParams):
        return init.copy()
    return unflatten(np.asarray(init, dtype=np.float64), cfg)


def _q_table(params: PolicyParams, embedded: EmbeddedDataset,
             chunk: int = 512) -> Array:
    """Action values for every dataset row, evaluated in chunks."""
    out = np.empty((len(embedded), 2))
    for start in range(0, len(embedded), chunk):
        idx = np.arange(start, min(start + chunk, len(embedded)))
        qb, ab = embedded.batch(idx)
        out[idx] = q_values(params, qb, ab)
    return out


def _td_targets(batch, target_q: Array, cfg: TrainConfig) -> Array:
    rewards = np.array([t.reward for t in batch])
    ends = np.array([t.end for t in batch])
    nxt = [t.next_state for t in batch]
    bootstrap = target_q[nxt].max(axis=1)
    return rewards + np.where(ends, 0.0, cfg.gamma * bootstrap)


def train(embedded: EmbeddedDataset, init, model_cfg: ModelConfig,
          cfg: TrainConfig, checkpoint_fn=None,
          keep_transitions: bool = False) -> TrainResult:
    """Run the full episode loop from a starting parameter set.

    init may be a flat weight vector (typically the pretrainer's best
    position) or a PolicyParams; either is copied, never mutated.
    checkpoint_fn(params), when given, runs after every episode and once
    more before a divergence error is raised.

    Each environment step stores one transition and, once the replay
    memory can fill a batch, takes one gradient step.  The per-episode
    record keeps steps survived, summed reward, mean loss, and the epsilon
    used.
    """
    n = len(embedded)
    if n == 0:
        raise ShapeError("cannot train on an empty dataset")
    rng = np.random.default_rng(cfg.seed)
    params = _as_params(init, model_cfg)
    # the target network only matters through its action values on dataset
    # rows, and those are frozen between refreshes, so evaluate them all at
    # once per refresh instead of re-running the encoder every update
    target_q = _q_table(params, embedded)
    memory = ReplayMemory(cfg.replay_capacity)
    labels = embedded.labels
    records = []
    all_transitions = []
    gradient_steps = 0

    for episode in range(cfg.episodes):
        eps = epsilon_schedule(cfg, episode)
        order = rng.permutation(n)
        cumulative = 0.0
        losses = []
        steps = 0
        episode_transitions = [] if keep_transitions else None

        for t in range(n):
            idx = int(order[t])
            # same draw order as epsilon_greedy, but the exploring branch
            # never needs the forward pass, so it is skipped there
            if rng.random() < eps:
                action = int(rng.integers(2))
            else:
                qb, ab = embedded.batch([idx])
                q = q_values(params, qb, ab)[0]
                action = int(q[1] > q[0])
            r, minority_miss = reward(int(labels[idx]), action, cfg.lam)
            exhausted = t == n - 1
            end = minority_miss or exhausted
            next_state = int(order[t + 1]) if not exhausted else idx
            transition = Transition(idx, action, r, next_state, end)
            memory.push(transition)
            if episode_transitions is not None:
                episode_transitions.append(transition)
            cumulative += r
            steps += 1

            if len(memory) >= cfg.batch_size:
                batch = memory.sample(cfg.batch_size, rng)
                targets = _td_targets(batch, target_q, cfg)
                states = [b.state for b in batch]
                actions = np.array([b.action for b in batch])
                sqb, sab = embedded.batch(states)
                loss, grads = loss_and_gradients(params, model_cfg, sqb, sab,
                                                 actions, targets)
                if not np.isfinite(loss):
                    if checkpoint_fn is not None:
                        checkpoint_fn(params)
                    raise NumericError(
                        f"non-finite loss at episode {episode}, step {t}")
                sgd_step(params, grads, cfg.learning_rate)
                gradient_steps += 1
                losses.append(loss)
                if gradient_steps % cfg.target_refresh == 0:
                    target_q = _q_table(params, embedded)

            if minority_miss:
                break

        mean_loss = float(np.mean(losses)) if losses else 0.0
        records.append(EpisodeRecord(episode, steps, cumulative, mean_loss, eps))
        if episode_transitions is not None:
            all_transitions.append(episode_transitions)
        if checkpoint_fn is not None:
            checkpoint_fn(params)

    return TrainResult(params, records, gradient_steps, all_transitions)


def mse_loss_and_gradients(params: PolicyParams, model_cfg: ModelConfig,
                           questions, answers, labels: Array):
    """Plain supervised objective: sum over the batch of (label - p)^2
    where p is the softmax probability of the right-answer action."""
    out, cache = forward(params, questions, answers)
    shifted = out - out.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    p = e[:, 1] / e.sum(axis=1)
    diff = p - labels
    loss = float(diff @ diff)
    dp = 2.0 * diff * p * (1.0 - p)
    dq = np.stack([-dp, dp], axis=1)
    grads = backward(dq, cache, params, model_cfg)
    return loss, grads


def train_mse_baseline(embedded: EmbeddedDataset, init, model_cfg: ModelConfig,
                       cfg: TrainConfig, gradient_steps: int) -> PolicyParams:
    """Reference trainer: same network, same optimizer, same number of
    gradient steps, but minimizing squared label error on uniformly drawn
    mini-batches with no reward shaping."""
    n = len(embedded)
    if n == 0:
        raise ShapeError("cannot train on an empty dataset")
    rng = np.random.default_rng(cfg.seed)
    params = _as_params(init, model_cfg)
    labels = embedded.labels.astype(np.float64)
    k = min(cfg.batch_size, n)
    for _ in range(gradient_steps):
        idx = rng.choice(n, size=k, replace=False)
        qb, ab = embedded.batch(idx)
        loss, grads = mse_loss_and_gradients(params, model_cfg, qb, ab, labels[idx])
        if not np.isfinite(loss):
            raise NumericError("non-finite loss in baseline training")
        sgd_step(params, grads, cfg.learning_rate)
    return params


def predict_scores(params: PolicyParams, embedded: EmbeddedDataset,
                   chunk: int = 512) -> Array:
    """Right-answer probability for every row, evaluated in chunks."""
    out = np.empty(len(embedded))
    for start in range(0, len(embedded), chunk):
        idx = np.arange(start, min(start + chunk, len(embedded)))
        qb, ab = embedded.batch(idx)
        out[idx] = relevance_scores(params, qb, ab)
    return out


def minority_recall(params: PolicyParams, embedded: EmbeddedDataset,
                    threshold: float = 0.5) -> float:
    """Fraction of minority (label 1) rows scored at or above threshold."""
    scores = predict_scores(params, embedded)
    positive = embedded.labels == 1
    if not positive.any():
        raise ShapeError("dataset has no minority rows")
    return float(np.mean(scores[positive] >= threshold))
