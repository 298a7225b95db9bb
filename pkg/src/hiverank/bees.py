"""Bee-colony search over flat weight vectors.

A colony holds a population of candidate solutions ("food sources"), each
with a fitness (higher is better) and a stall counter.  Per iteration the
optimizer runs three phases: every source proposes a one-coordinate
neighbor (employed), sources proportionally re-propose by fitness
(onlooker), and the single most-stalled source past the abandonment limit
is re-seeded at random (scout).  Two neighbor rules are available: the
classic symmetric perturbation, and a mutual rule that always moves the
worse of the chosen pair toward the better one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

Array = np.ndarray

STANDARD = "standard"
MUTUAL = "mutual"


@dataclass
class ColonyConfig:
    """Knobs for one optimizer run.

    dim:             number of coordinates per solution
    lower / upper:   per-coordinate bounds (scalars broadcast)
    colony_size:     number of food sources
    limit:           stall count after which a source may be abandoned;
                     None means half the colony times dim
    max_iterations:  iteration cap, None for unbounded
    max_evaluations: fitness-call budget, None for unbounded
    factor:          upper end of the U(0, F) perturbation in mutual mode
    mode:            "standard" or "mutual"
    """

    dim: int
    lower: float | Array = -1.0
    upper: float | Array = 1.0
    colony_size: int = 100
    limit: int | None = None
    max_iterations: int | None = None
    max_evaluations: int | None = 3000
    factor: float = 1.5
    mode: str = MUTUAL
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError(f"dim must be >= 1, got {self.dim}")
        if self.colony_size < 2:
            raise ConfigError(f"colony_size must be >= 2, got {self.colony_size}")
        if self.limit is not None and self.limit < 1:
            raise ConfigError(f"limit must be >= 1, got {self.limit}")
        if self.factor < 0:
            raise ConfigError(f"factor must be >= 0, got {self.factor}")
        if self.mode not in (STANDARD, MUTUAL):
            raise ConfigError(f"mode must be '{STANDARD}' or '{MUTUAL}', got {self.mode!r}")
        if self.max_iterations is None and self.max_evaluations is None:
            raise ConfigError("need max_iterations or max_evaluations to bound the run")
        lo = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (self.dim,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (self.dim,)).copy()
        if (lo > hi).any():
            raise ConfigError("lower bound exceeds upper bound on some coordinate")
        self.lower = lo
        self.upper = hi

    @property
    def effective_limit(self) -> int:
        if self.limit is not None:
            return self.limit
        return max(1, (self.colony_size // 2) * self.dim)


@dataclass
class Colony:
    """Population state: positions (N, D), fitnesses (N,), stall counts (N,)."""

    positions: Array
    fitnesses: Array
    trials: Array


@dataclass
class IterationRecord:
    iteration: int
    best_fitness: float
    mean_fitness: float
    abandonments: int


@dataclass
class AbcResult:
    best_position: Array
    best_fitness: float
    history: Array               # best-so-far fitness, one entry per iteration
    records: list = field(default_factory=list)
    evaluations: int = 0


def random_position(lower: Array, upper: Array, rng: np.random.Generator) -> Array:
    """Uniform draw in the box: x_j = lo_j + rand(0,1) * (hi_j - lo_j)."""
    return lower + rng.random(lower.shape[0]) * (upper - lower)


def init_population(cfg: ColonyConfig, fitness_fn, rng: np.random.Generator) -> Colony:
    positions = np.stack([random_position(cfg.lower, cfg.upper, rng)
                          for _ in range(cfg.colony_size)])
    fitnesses = np.array([fitness_fn(p) for p in positions], dtype=np.float64)
    trials = np.zeros(cfg.colony_size, dtype=np.int64)
    return Colony(positions, fitnesses, trials)


def neighbor_standard_update(x_i: Array, x_k: Array, coord: int, phi: float,
                             lower: Array, upper: Array) -> Array:
    """Symmetric one-coordinate perturbation: v_j = x_i_j + phi (x_i_j - x_k_j)."""
    v = x_i.copy()
    v[coord] = x_i[coord] + phi * (x_i[coord] - x_k[coord])
    return np.clip(v, lower, upper)


def neighbor_mutual_update(x_i: Array, x_k: Array, fit_i: float, fit_k: float,
                           coord: int, phi: float,
                           lower: Array, upper: Array) -> Array:
    """Fitness-aware perturbation of source i's position.

    The touched coordinate always moves from the worse of the pair toward
    the better one:

        fit_i < fit_k:  v_j = x_i_j + phi (x_k_j - x_i_j)
        otherwise:      v_j = x_k_j + phi (x_i_j - x_k_j)

    phi is drawn from U(0, F) by the caller.  The candidate keeps x_i's
    remaining coordinates either way, and the greedy replacement downstream
    compares against source i, so the second branch amounts to source i
    re-deriving one of its own coordinates from the weaker partner's offset.
    When i is the weaker one, the first branch drags it toward the partner,
    with overshoot past it once phi exceeds 1.
    """
    v = x_i.copy()
    if fit_i < fit_k:
        v[coord] = x_i[coord] + phi * (x_k[coord] - x_i[coord])
    else:
        v[coord] = x_k[coord] + phi * (x_i[coord] - x_k[coord])
    return np.clip(v, lower, upper)


def propose_candidate(colony: Colony, i: int, cfg: ColonyConfig,
                      rng: np.random.Generator) -> Array:
    """Draw partner, coordinate, and step size, then apply the mode's rule.

    Draw order is fixed (partner, coordinate, magnitude) so runs with the
    same seed replay exactly.
    """
    n = colony.positions.shape[0]
    k = int(rng.integers(n - 1))
    if k >= i:
        k += 1  # partner must differ from i
    coord = int(rng.integers(cfg.dim))
    if cfg.mode == STANDARD:
        phi = rng.uniform(-1.0, 1.0)
        return neighbor_standard_update(colony.positions[i], colony.positions[k],
                                        coord, phi, cfg.lower, cfg.upper)
    phi = rng.uniform(0.0, cfg.factor)
    return neighbor_mutual_update(colony.positions[i], colony.positions[k],
                                  colony.fitnesses[i], colony.fitnesses[k],
                                  coord, phi, cfg.lower, cfg.upper)


def selection_probabilities(fitnesses: Array) -> Array:
    """Fitness-proportional probabilities, p_i = fit_i / sum(fit).

    An all-zero fitness vector would divide by zero; that degenerate case
    falls back to uniform so the onlooker phase keeps moving.
    """
    fitnesses = np.asarray(fitnesses, dtype=np.float64)
    total = fitnesses.sum()
    if total <= 0.0:
        return np.full(fitnesses.shape[0], 1.0 / fitnesses.shape[0])
    return fitnesses / total


def run_abc(fitness_fn, cfg: ColonyConfig) -> AbcResult:
    """Maximize fitness_fn over the configured box.

    Stops at the iteration or evaluation budget, whichever bites first.
    The returned history holds the best-so-far fitness after
    initialization and after every iteration, so it never decreases.
    """
    rng = np.random.default_rng(cfg.seed)
    evaluations = 0

    def budget_left():
        return cfg.max_evaluations is None or evaluations < cfg.max_evaluations

    colony = init_population(cfg, fitness_fn, rng)
    evaluations += cfg.colony_size
    best_idx = int(np.argmax(colony.fitnesses))
    best_position = colony.positions[best_idx].copy()
    best_fitness = float(colony.fitnesses[best_idx])
    history = [best_fitness]
    records = [IterationRecord(0, best_fitness, float(colony.fitnesses.mean()), 0)]
    limit = cfg.effective_limit

    def consider(i: int, candidate: Array, fitness: float):
        nonlocal best_position, best_fitness
        if fitness > colony.fitnesses[i]:
            colony.positions[i] = candidate
            colony.fitnesses[i] = fitness
            colony.trials[i] = 0
        else:
            colony.trials[i] += 1
        if fitness > best_fitness:
            best_fitness = float(fitness)
            best_position = candidate.copy()

    iteration = 0
    while budget_left() and (cfg.max_iterations is None or iteration < cfg.max_iterations):
        iteration += 1

        for i in range(cfg.colony_size):
            if not budget_left():
                break
            candidate = propose_candidate(colony, i, cfg, rng)
            fitness = fitness_fn(candidate)
            evaluations += 1
            consider(i, candidate, fitness)

        probs = selection_probabilities(colony.fitnesses)
        for i in range(cfg.colony_size):
            if not budget_left():
                break
            if rng.random() < probs[i]:
                candidate = propose_candidate(colony, i, cfg, rng)
                fitness = fitness_fn(candidate)
                evaluations += 1
                consider(i, candidate, fitness)

        abandonments = 0
        stalled = int(np.argmax(colony.trials))
        if colony.trials[stalled] > limit and budget_left():
            # only the most-stalled source scouts, one per iteration
            fresh = random_position(cfg.lower, cfg.upper, rng)
            fitness = fitness_fn(fresh)
            evaluations += 1
            colony.positions[stalled] = fresh
            colony.fitnesses[stalled] = fitness
            colony.trials[stalled] = 0
            abandonments = 1
            if fitness > best_fitness:
                best_fitness = float(fitness)
                best_position = fresh.copy()

        history.append(best_fitness)
        records.append(IterationRecord(iteration, best_fitness,
                                       float(colony.fitnesses.mean()), abandonments))

    return AbcResult(best_position, best_fitness, np.array(history),
                     records, evaluations)
