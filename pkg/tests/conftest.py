"""Shared fixtures: instance paths, parsed instances, a toy grid problem."""

from __future__ import annotations

from pathlib import Path

import pytest

from survroute import kernels
from survroute.moo import CandidateSolution, ObjectiveVector, Problem
from survroute.netmodel import load_instance

INSTANCE_DIR = Path(__file__).resolve().parent.parent / "instances"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT-compile everything up front so per-test timing stays meaningful
    kernels.warmup()


@pytest.fixture(scope="session")
def trivial_instance():
    return load_instance(INSTANCE_DIR / "trivial_1mr.net")


@pytest.fixture(scope="session")
def standard_instance():
    return load_instance(INSTANCE_DIR / "standard_3mr.net")


@pytest.fixture(scope="session")
def stress_instance():
    return load_instance(INSTANCE_DIR / "stress_5mr.net")


def make_sol(*values, key: str | None = None) -> CandidateSolution:
    """Bare solution around an objective vector, for archive/engine tests."""
    vec = tuple(float(v) for v in values)
    return CandidateSolution(
        genotype=vec,
        objectives=ObjectiveVector(vec),
        genotype_key=key if key is not None else repr(vec),
    )


class GridProblem(Problem):
    """Toy problem on an n x n integer grid.

    Genotype (x, y); objectives (x + y, (n-1 - x) + y): the y = 0 row is the
    Pareto front, and larger y is strictly worse. ``move_prob`` gates whether
    mutation moves at all.
    """

    objective_count = 2

    def __init__(self, n: int = 8, move_prob: float = 1.0):
        self.n = n
        self.move_prob = move_prob

    def evaluate(self, genotype):
        x, y = genotype
        return ObjectiveVector((float(x + y), float((self.n - 1 - x) + y)))

    def random_genotype(self, rng):
        return (int(rng.integers(self.n)), int(rng.integers(self.n)))

    def is_valid(self, genotype):
        x, y = genotype
        return 0 <= x < self.n and 0 <= y < self.n

    def genotype_key(self, genotype):
        return f"{genotype[0]},{genotype[1]}"

    def mutate(self, genotype, rng):
        if rng.random() >= self.move_prob:
            return genotype
        x, y = genotype
        axis = int(rng.integers(2))
        step = 1 if rng.random() < 0.5 else -1
        if axis == 0:
            x = min(self.n - 1, max(0, x + step))
        else:
            y = min(self.n - 1, max(0, y + step))
        return (x, y)

    def crossover(self, a, b, rng):
        return (a[0], b[1]) if rng.random() < 0.5 else (b[0], a[1])

    def heavy_mutate(self, genotype, rng):
        return self.random_genotype(rng)

    def neighborhood(self, genotype):
        x, y = genotype
        out = []
        for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nx, ny = x + dx, y + dy
            if 0 <= nx < self.n and 0 <= ny < self.n:
                out.append((nx, ny))
        return out
