"""Analytic test functions for exercising the colony optimizer.

All are minimization problems with known optima, expressed here as plain
objectives; as_fitness() turns a nonnegative objective into the (0, 1]
fitness the optimizer maximizes.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def sphere(x: Array) -> float:
    """Sum of squares.  Minimum 0 at the origin; smooth and unimodal."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * x))


def rosenbrock(x: Array) -> float:
    """Banana-valley function.

    f(x) = sum 100 (x_{j+1} - x_j^2)^2 + (1 - x_j)^2, minimum 0 at the
    all-ones point.  The curved narrow valley makes progress slow for
    coordinate-wise perturbation methods, which is why it is here.
    """
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x: Array) -> float:
    """Highly multimodal cosine-rippled bowl; minimum 0 at the origin."""
    x = np.asarray(x, dtype=np.float64)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


BENCHMARKS = {
    "sphere": sphere,
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
}


def as_fitness(objective):
    """Wrap a nonnegative objective as a fitness in (0, 1].

    fitness(x) = 1 / (1 + f(x)); maximizing the wrapped value minimizes f.
    """
    def fitness(x: Array) -> float:
        return 1.0 / (1.0 + objective(x))
    return fitness


def objective_of_fitness(fitness: float) -> float:
    """Invert as_fitness: recover f(x) from 1 / (1 + f(x))."""
    return 1.0 / fitness - 1.0
