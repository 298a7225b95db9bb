"""Analytic objectives and the fitness wrapping around them."""

import numpy as np
import pytest

from hiverank.benchmarks import (BENCHMARKS, as_fitness, objective_of_fitness,
                                 rastrigin, rosenbrock, sphere)


def test_sphere_values():
    assert sphere(np.zeros(5)) == 0.0
    assert sphere(np.array([1.0, 2.0, -2.0])) == 9.0


def test_rosenbrock_minimum_at_ones():
    assert rosenbrock(np.ones(6)) == 0.0
    # one step off the valley floor: 100 (0 - 1)^2 + (1 - 1)^2
    assert rosenbrock(np.array([1.0, 0.0])) == 100.0
    assert rosenbrock(np.array([0.0, 0.0])) == 1.0


def test_rastrigin_minimum_and_ripple():
    assert rastrigin(np.zeros(4)) == pytest.approx(0.0)
    # integer points are local minima of the cosine term
    assert rastrigin(np.array([1.0])) == pytest.approx(1.0)
    assert rastrigin(np.array([0.5])) == pytest.approx(20.25)


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_benchmarks_are_nonnegative(name):
    rng = np.random.default_rng(70)
    fn = BENCHMARKS[name]
    for _ in range(30):
        assert fn(rng.uniform(-5, 5, 8)) >= 0.0


def test_as_fitness_inverts_ordering():
    fit = as_fitness(sphere)
    assert fit(np.zeros(3)) == 1.0
    assert fit(np.ones(3)) == pytest.approx(0.25)
    assert fit(np.zeros(3)) > fit(np.ones(3))


def test_objective_of_fitness_round_trips():
    fit = as_fitness(rosenbrock)
    x = np.array([0.3, -1.2, 2.0])
    assert objective_of_fitness(fit(x)) == pytest.approx(rosenbrock(x))
