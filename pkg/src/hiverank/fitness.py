"""Pretraining fitness: how good is a flat weight vector as a classifier.

The colony cannot afford a full-dataset evaluation per candidate, so each
run freezes one random subsample up front and scores every candidate
against it; comparisons between candidates then stay apples-to-apples.
"""

from __future__ import annotations

import numpy as np

from .bees import ColonyConfig, run_abc
from .data import EmbeddedDataset
from .encoding import dimension, unflatten
from .params import ModelConfig
from .policy import relevance_scores

Array = np.ndarray


def training_fitness(vector: Array, questions, answers, labels: Array,
                     cfg: ModelConfig) -> float:
    """1 / (1 + sum of squared label errors), in (0, 1].

    The prediction for each pair is the softmax probability of the
    right-answer action, so a perfect classifier scores exactly 1.
    """
    params = unflatten(vector, cfg)
    predicted = relevance_scores(params, questions, answers)
    err = float(np.sum((labels - predicted) ** 2))
    return 1.0 / (1.0 + err)


def make_training_fitness(embedded: EmbeddedDataset, cfg: ModelConfig,
                          subsample: int = 256, seed: int = 0):
    """Freeze a subsample and return fitness(vector) over it."""
    n = len(embedded)
    if n <= subsample:
        idx = np.arange(n)
    else:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(n, size=subsample, replace=False))
    questions, answers = embedded.batch(idx)
    labels = embedded.labels[idx].astype(np.float64)

    def fitness(vector: Array) -> float:
        return training_fitness(vector, questions, answers, labels, cfg)

    return fitness


def pretrain_weights(embedded: EmbeddedDataset, model_cfg: ModelConfig,
                     colony_cfg: ColonyConfig | None = None, *,
                     subsample: int = 256, seed: int = 0, **colony_kwargs):
    """Search weight space for a strong starting point.

    Returns the optimizer result; its best_position is the flat vector to
    hand to the trainer.  colony_kwargs override ColonyConfig defaults when
    no explicit config is given (dim is always derived from the model).
    """
    d = dimension(model_cfg)
    if colony_cfg is None:
        colony_cfg = ColonyConfig(dim=d, seed=seed, **colony_kwargs)
    elif colony_cfg.dim != d:
        raise ValueError(f"colony dim {colony_cfg.dim} != model dimension {d}")
    fitness = make_training_fitness(embedded, model_cfg, subsample=subsample, seed=seed)
    return run_abc(fitness, colony_cfg)
