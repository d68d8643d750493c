"""Memetic optimization loop: selection, variation, local search, replacement,
archive update, and stagnation-triggered random immigrants.

Every stage's operator is picked by its success-driven scheduler pool. The
run is fully deterministic for a given seed: one PRNG is threaded through
the pipeline in a fixed draw order (see ``run``).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import measures
from .archive import (
    REDUCTION_OPERATORS,
    NondominatedArchive,
    insert as archive_insert,
    nondom,
    rank_and_crowding,
    survival_order,
)
from .errors import ConfigError, InstanceError
from .measures import ReferencePoint
from .moo import CandidateSolution, Dominance, Problem, dominates
from .scheduler import OperatorPool, choose, probabilities, report

SELECTION_OPERATORS = ("tournament", "uniform")
VARIATION_OPERATORS = ("mutate", "crossover")
LOCAL_SEARCH_OPERATORS = ("chebyshev", "pareto_step")
REPLACEMENT_OPERATORS = ("elitist", "generational_elite1")
IMMIGRATION_OPERATORS = ("fresh_random", "heavy_mutation")

POOL_OPERATORS = {
    "SEL": SELECTION_OPERATORS,
    "VAR": VARIATION_OPERATORS,
    "LS": LOCAL_SEARCH_OPERATORS,
    "REP": REPLACEMENT_OPERATORS,
    "RED": REDUCTION_OPERATORS,
    "IMM": IMMIGRATION_OPERATORS,
}


@dataclass(frozen=True)
class RunParams:
    """Engine configuration. Defaults are sized for sub-5-second desk runs."""

    population_size: int = 50
    offspring_size: int = 50
    archive_capacity: int = 100
    evaluation_budget: int = 100_000
    stagnation_window: int = 10
    stagnation_tolerance: float = 1e-9  # relative to the current hypervolume
    immigrant_fraction: float = 0.3  # 0 disables immigration
    local_search_budget: int = 20  # neighbor evaluations per individual
    scheduler_window: int = 50
    scheduler_floor: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if not 1 <= self.offspring_size <= self.population_size:
            raise ConfigError("offspring_size must be in [1, population_size]")
        if self.archive_capacity < 1:
            raise ConfigError("archive_capacity must be >= 1")
        if self.evaluation_budget < 0:
            raise ConfigError("evaluation_budget must be >= 0")
        if self.stagnation_window < 1:
            raise ConfigError("stagnation_window must be >= 1")
        if self.stagnation_tolerance < 0:
            raise ConfigError("stagnation_tolerance must be >= 0")
        if not 0.0 <= self.immigrant_fraction <= 1.0:
            raise ConfigError("immigrant_fraction must be in [0, 1]")
        if self.local_search_budget < 0:
            raise ConfigError("local_search_budget must be >= 0")
        if self.scheduler_window < 1:
            raise ConfigError("scheduler_window must be >= 1")
        if not 0.0 <= self.scheduler_floor <= 0.5:
            raise ConfigError("scheduler_floor must be in [0, 0.5] (pools have 2 operators)")


@dataclass
class RunResult:
    """Everything a finished run reports.

    ``evaluations`` stays within one offspring batch of the budget
    (<= max(population_size, budget + offspring_size)); initialization is
    never truncated and local search / immigration are gated per evaluation.
    """

    archive: NondominatedArchive
    evaluations: int
    hv_trace: list[float]
    reference_point: tuple[float, ...]
    scheduler_stats: dict
    final_pools: dict[str, OperatorPool] = field(repr=False)
    wall_clock_seconds: float = 0.0
    seed: int = 0
    params: RunParams | None = None


class Evaluator:
    """Counts objective evaluations (one per call, duplicates included) against a budget."""

    def __init__(self, problem: Problem, budget: int | None = None):
        self.problem = problem
        self.budget = budget
        self.count = 0

    @property
    def remaining(self) -> float:
        return math.inf if self.budget is None else self.budget - self.count

    def evaluate(self, genotype) -> CandidateSolution:
        self.count += 1
        return CandidateSolution(
            genotype=genotype,
            objectives=self.problem.evaluate(genotype),
            genotype_key=self.problem.genotype_key(genotype),
        )


def _random_valid_genotype(problem: Problem, rng, attempts: int = 1000):
    for _ in range(attempts):
        g = problem.random_genotype(rng)
        if problem.is_valid(g):
            return g
    raise InstanceError(f"no valid genotype produced in {attempts} attempts")


def initialize(problem: Problem, params: RunParams, rng, evaluator: Evaluator | None = None) -> list[CandidateSolution]:
    """Random evaluated population of population_size members."""
    ev = evaluator or Evaluator(problem)
    return [ev.evaluate(_random_valid_genotype(problem, rng)) for _ in range(params.population_size)]


def select_from(
    pop: Sequence[CandidateSolution],
    arch: NondominatedArchive,
    operator: str,
    count: int,
    rng,
) -> list[CandidateSolution]:
    """Draw ``count`` parents from population + archive with the given SEL operator.

    tournament: two uniform picks per slot, winner by (rank, crowding, key);
    uniform: one uniform pick per slot.
    """
    union = list(pop) + list(arch.members)
    if not union:
        raise ConfigError("cannot select from an empty population")
    if operator == "uniform":
        return [union[int(rng.integers(len(union)))] for _ in range(count)]
    if operator != "tournament":
        raise ConfigError(f"unknown selection operator {operator!r}")
    ranks, crowd = rank_and_crowding(union)
    keys = [(int(ranks[i]), -crowd[i], union[i].sort_key()) for i in range(len(union))]
    parents = []
    for _ in range(count):
        i = int(rng.integers(len(union)))
        j = int(rng.integers(len(union)))
        parents.append(union[i] if keys[i] <= keys[j] else union[j])
    return parents


def vary(
    parents: Sequence[CandidateSolution],
    problem: Problem,
    operator: str,
    rng,
    evaluator: Evaluator,
) -> list[CandidateSolution]:
    """One evaluated offspring per parent slot via the chosen VAR operator."""
    lam = len(parents)
    offspring = []
    for i, parent in enumerate(parents):
        if operator == "mutate":
            g = problem.mutate(parent.genotype, rng)
        elif operator == "crossover":
            g = problem.crossover(parent.genotype, parents[(i + 1) % lam].genotype, rng)
        else:
            raise ConfigError(f"unknown variation operator {operator!r}")
        offspring.append(evaluator.evaluate(g))
    return offspring


def _simplex_weights(rng, dim: int) -> np.ndarray:
    # exponential trick; dim uniform draws, strictly positive components
    raw = np.array([-math.log(1.0 - rng.random()) for _ in range(dim)])
    raw = np.maximum(raw, 1e-12)
    return raw / raw.sum()


def local_search(
    solutions: Sequence[CandidateSolution],
    problem: Problem,
    operator: str,
    budget: int,
    rng,
    evaluator: Evaluator,
) -> list[CandidateSolution]:
    """Improve each solution by first-improvement walks over the problem neighborhood.

    chebyshev: descend max_i(w_i * z_i) for a per-individual random simplex
    weight w (strictly positive, so an accepted move can never be dominated
    by the walk's starting point). pareto_step: accept the first neighbor
    that Pareto-dominates the current point. ``budget`` caps neighbor
    evaluations per individual; the run budget gates each evaluation too.
    """
    if operator not in LOCAL_SEARCH_OPERATORS:
        raise ConfigError(f"unknown local-search operator {operator!r}")
    out = []
    for sol in solutions:
        current = sol
        if operator == "chebyshev":
            w = _simplex_weights(rng, len(sol.objectives))

            def score(s: CandidateSolution) -> float:
                return max(wi * zi for wi, zi in zip(w, s.objectives.values))

            current_score = score(current)
        used = 0
        improved = True
        while improved and used < budget and evaluator.remaining > 0:
            improved = False
            for g in problem.neighborhood(current.genotype):
                if used >= budget or evaluator.remaining <= 0:
                    break
                cand = evaluator.evaluate(g)
                used += 1
                if operator == "chebyshev":
                    cand_score = score(cand)
                    if cand_score < current_score:
                        current, current_score = cand, cand_score
                        improved = True
                        break
                elif dominates(cand.objectives, current.objectives) is Dominance.DOMINATES:
                    current = cand
                    improved = True
                    break
        out.append(current)
    return out


def replace(
    pop: Sequence[CandidateSolution],
    offspring: Sequence[CandidateSolution],
    operator: str,
    target_size: int | None = None,
) -> list[CandidateSolution]:
    """Survival selection over population + offspring.

    elitist: nondominated rank then crowding truncation. generational_elite1:
    the offspring survive (topped up by rank order if undersized), with the
    union's best-ranked member guaranteed a slot.
    """
    n = len(pop) if target_size is None else target_size
    union = list(pop) + list(offspring)
    order = survival_order(union)
    if operator == "elitist":
        return [union[i] for i in order[:n]]
    if operator != "generational_elite1":
        raise ConfigError(f"unknown replacement operator {operator!r}")
    chosen = list(range(len(pop), len(union)))[:n]
    if len(chosen) < n:
        taken = set(chosen)
        for i in order:
            if len(chosen) == n:
                break
            if i not in taken:
                chosen.append(i)
                taken.add(i)
    best = order[0]
    if best not in set(chosen):
        position = {idx: p for p, idx in enumerate(order)}
        worst = max(chosen, key=lambda i: position[i])
        chosen[chosen.index(worst)] = best
    return [union[i] for i in chosen]


def stagnation(hv_trace: Sequence[float], window: int, tolerance: float) -> bool:
    """True iff the last ``window`` hypervolume deltas are each below ``tolerance``."""
    if len(hv_trace) < window + 1:
        return False
    tail = hv_trace[-(window + 1):]
    return all(tail[i + 1] - tail[i] < tolerance for i in range(window))


def random_immigrants(
    pop: Sequence[CandidateSolution],
    arch: NondominatedArchive,
    problem: Problem,
    operator: str,
    fraction: float,
    rng,
    evaluator: Evaluator,
    max_new: int | None = None,
) -> list[CandidateSolution]:
    """Replace the ceil(fraction * N) worst-ranked members with newcomers.

    The best-ranked member always survives, so at most N-1 are replaced.
    fresh_random draws new genotypes; heavy_mutation perturbs uniformly
    chosen archive members. ``max_new`` (remaining budget) may shrink the
    batch at the end of a run.
    """
    if operator not in IMMIGRATION_OPERATORS:
        raise ConfigError(f"unknown immigration operator {operator!r}")
    n = len(pop)
    # tiny slack so exact products like 0.3 * 10 do not ceil to 4
    k = math.ceil(fraction * n - 1e-9)
    k = min(k, n - 1)
    if max_new is not None:
        k = min(k, max_new)
    if k <= 0:
        return list(pop)
    order = survival_order(pop)
    survivors = [pop[i] for i in order[: n - k]]
    newcomers = []
    for _ in range(k):
        if operator == "fresh_random" or len(arch.members) == 0:
            g = _random_valid_genotype(problem, rng)
        else:
            src = arch.members[int(rng.integers(len(arch.members)))]
            g = problem.heavy_mutate(src.genotype, rng)
        newcomers.append(evaluator.evaluate(g))
    return survivors + newcomers


def _nondominated_fraction(pop: Sequence[CandidateSolution], arch: NondominatedArchive) -> float:
    if not pop:
        return 0.0
    A = arch.objective_matrix()
    if A.size == 0:
        return 1.0
    P = np.array([s.objectives.values for s in pop], dtype=np.float64)
    dominated = ((A[:, None, :] <= P[None, :, :]).all(axis=2) & (A[:, None, :] < P[None, :, :]).any(axis=2)).any(axis=0)
    return float(1.0 - dominated.mean())


def _reference_from(pop: Sequence[CandidateSolution]) -> ReferencePoint:
    worst = np.array([s.objectives.values for s in pop], dtype=np.float64).max(axis=0)
    return ReferencePoint(tuple(w * 1.1 + 1e-9 for w in worst))


def run(problem: Problem, params: RunParams | None = None, seed: int | None = None) -> RunResult:
    """Optimize until the evaluation budget is exhausted; returns the final archive.

    Structure: an outer loop of inner passes; each inner iteration runs
    SelectFrom -> Vary -> LocalSearch -> Replace and folds the offspring
    into the archive, then credits every scheduler pool. When the archive
    hypervolume stalls for ``stagnation_window`` iterations, the inner loop
    ends and random immigrants refresh the population (each outer pass runs
    at least one inner iteration, so a zero immigrant fraction cannot wedge
    the loop).

    Draw order per inner iteration, from one seeded generator: SEL choose
    (1 draw), selection (1-2 index draws per parent), VAR choose, variation
    operator draws, LS choose, local-search draws (simplex weights for
    chebyshev), REP choose, RED choose. Immigration adds: IMM choose, then
    per-immigrant draws. This order is part of the reproducibility contract.

    Credit: SEL/VAR/LS score one outcome per offspring (accepted into the
    archive or not); REP scores whether the population's archive-nondominated
    fraction strictly improved; RED and IMM score whether the hypervolume
    avoided decline over the following inner iteration (unresolved at budget
    exhaustion means no report).
    """
    params = params or RunParams()
    if problem.objective_count not in (2, 3):
        raise ConfigError("hypervolume-guided run requires 2 or 3 objectives")
    if seed is None:
        seed = params.seed
    rng = np.random.default_rng(seed)
    started = time.perf_counter()

    evaluator = Evaluator(problem, params.evaluation_budget)
    pools = {
        kind: OperatorPool(
            kind=kind, operators=ops, window=params.scheduler_window, p_min=params.scheduler_floor
        )
        for kind, ops in POOL_OPERATORS.items()
    }
    stats = {kind: {op: [0, 0] for op in ops} for kind, ops in POOL_OPERATORS.items()}

    def note(kind: str, op: str, success: bool) -> None:
        pools[kind] = report(pools[kind], op, success)
        stats[kind][op][0] += 1
        stats[kind][op][1] += int(success)

    pop = initialize(problem, params, rng, evaluator)
    arch = nondom(pop, capacity=params.archive_capacity)
    ref = _reference_from(pop)
    hv = measures.hypervolume_clipped(arch.objective_matrix(), ref)
    trace = [hv]
    pending_red: tuple[str, float] | None = None
    pending_imm: tuple[str, float] | None = None

    while evaluator.remaining > 0:
        forced = True  # immigration resets stagnation: always run one iteration
        while evaluator.remaining > 0:
            tolerance = params.stagnation_tolerance * max(1.0, trace[-1])
            if not forced and stagnation(trace, params.stagnation_window, tolerance):
                break
            forced = False

            sel_op = choose(pools["SEL"], rng)
            parents = select_from(pop, arch, sel_op, params.offspring_size, rng)
            var_op = choose(pools["VAR"], rng)
            offspring = vary(parents, problem, var_op, rng, evaluator)
            ls_op = choose(pools["LS"], rng)
            offspring = local_search(
                offspring, problem, ls_op, params.local_search_budget, rng, evaluator
            )
            rep_op = choose(pools["REP"], rng)
            new_pop = replace(pop, offspring, rep_op, params.population_size)
            red_op = choose(pools["RED"], rng)
            accepted = []
            for s in offspring:
                arch, ok = archive_insert(arch, s, policy=red_op)
                accepted.append(ok)
            hv = measures.hypervolume_clipped(arch.objective_matrix(), ref)

            for ok in accepted:
                note("SEL", sel_op, ok)
                note("VAR", var_op, ok)
                note("LS", ls_op, ok)
            note("REP", rep_op, _nondominated_fraction(new_pop, arch) > _nondominated_fraction(pop, arch))
            if pending_red is not None:
                note("RED", pending_red[0], hv >= pending_red[1])
            pending_red = (red_op, hv)
            if pending_imm is not None:
                note("IMM", pending_imm[0], hv >= pending_imm[1])
                pending_imm = None

            pop = new_pop
            trace.append(hv)

        if evaluator.remaining > 0 and params.immigrant_fraction > 0:
            imm_op = choose(pools["IMM"], rng)
            pop = random_immigrants(
                pop,
                arch,
                problem,
                imm_op,
                params.immigrant_fraction,
                rng,
                evaluator,
                max_new=int(evaluator.remaining),
            )
            pending_imm = (imm_op, trace[-1])

    scheduler_stats = {}
    for kind, pool in pools.items():
        scheduler_stats[kind] = {
            "operators": list(pool.operators),
            "probabilities": [float(p) for p in probabilities(pool)],
            "trials": [stats[kind][op][0] for op in pool.operators],
            "successes": [stats[kind][op][1] for op in pool.operators],
        }

    return RunResult(
        archive=arch,
        evaluations=evaluator.count,
        hv_trace=trace,
        reference_point=ref.values,
        scheduler_stats=scheduler_stats,
        final_pools=pools,
        wall_clock_seconds=time.perf_counter() - started,
        seed=seed,
        params=params,
    )
