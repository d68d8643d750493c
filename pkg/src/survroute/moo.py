"""Objective-space primitives: objective vectors, Pareto dominance, the problem interface.

Everything here is a plain immutable value; minimization is assumed
throughout (callers negate objectives if they need maximization).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import ContractViolation, ValidityError


class Dominance(enum.Enum):
    """Outcome of comparing two objective vectors under minimization."""

    DOMINATES = "dominates"
    DOMINATED_BY = "dominated_by"
    INCOMPARABLE = "incomparable"
    EQUAL = "equal"


@dataclass(frozen=True)
class ObjectiveVector:
    """A point in objective space. All components finite, length >= 1."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        vals = tuple(float(v) for v in values)
        if len(vals) == 0:
            raise ContractViolation("objective vector must have at least one component")
        for v in vals:
            if not math.isfinite(v):
                raise ContractViolation(f"objective component is not finite: {v!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class CandidateSolution:
    """An evaluated solution: genotype plus its objective vector.

    ``genotype_key`` is the problem's canonical serialization of the
    genotype; it drives duplicate detection and deterministic tie-breaking,
    and it defines equality (the raw genotype may be any opaque object).
    """

    genotype: Any = field(compare=False)
    objectives: ObjectiveVector
    genotype_key: str

    def sort_key(self) -> tuple[tuple[float, ...], str]:
        return (self.objectives.values, self.genotype_key)


class Problem:
    """Capability record every optimization target implements.

    ``evaluate`` must be pure and deterministic: the same genotype always
    maps to the same objective vector, bit for bit, and it must be safe to
    call concurrently.
    """

    objective_count: int = 0

    def evaluate(self, genotype) -> ObjectiveVector:
        raise NotImplementedError

    def random_genotype(self, rng):
        raise NotImplementedError

    def is_valid(self, genotype) -> bool:
        raise NotImplementedError

    def invalid_reason(self, genotype) -> str | None:
        """None when valid, else a short reason code."""
        return None if self.is_valid(genotype) else "invalid"

    def genotype_key(self, genotype) -> str:
        return repr(genotype)

    # variation operators (VAR pool)
    def mutate(self, genotype, rng):
        raise NotImplementedError

    def crossover(self, a, b, rng):
        raise NotImplementedError

    # heavy mutation backs the archive-based immigration operator (IMM pool)
    def heavy_mutate(self, genotype, rng):
        raise NotImplementedError

    # local-move neighborhood (LS pools walk this in the returned order)
    def neighborhood(self, genotype) -> Sequence[Any]:
        raise NotImplementedError


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> Dominance:
    """Classify a vs b under weak Pareto dominance (minimization).

    Comparison is exact floating point: evaluation is deterministic, so
    duplicated genotypes compare EQUAL exactly, and a tolerance would break
    transitivity of the partial order.
    """
    av, bv = a.values, b.values
    if len(av) != len(bv):
        raise ContractViolation(f"objective length mismatch: {len(av)} vs {len(bv)}")
    a_le = True
    b_le = True
    for x, y in zip(av, bv):
        if x > y:
            a_le = False
        elif x < y:
            b_le = False
    if a_le and b_le:
        return Dominance.EQUAL
    if a_le:
        return Dominance.DOMINATES
    if b_le:
        return Dominance.DOMINATED_BY
    return Dominance.INCOMPARABLE


def evaluate(problem: Problem, genotype) -> ObjectiveVector:
    """Evaluate a genotype after checking the problem's validity predicate."""
    reason = problem.invalid_reason(genotype)
    if reason is not None:
        raise ValidityError(f"invalid genotype ({reason})")
    objectives = problem.evaluate(genotype)
    if len(objectives) != problem.objective_count:
        raise ContractViolation(
            f"problem returned {len(objectives)} objectives, declared {problem.objective_count}"
        )
    return objectives


def make_solution(problem: Problem, genotype) -> CandidateSolution:
    """Evaluate and wrap a genotype as a CandidateSolution."""
    return CandidateSolution(
        genotype=genotype,
        objectives=evaluate(problem, genotype),
        genotype_key=problem.genotype_key(genotype),
    )
