"""Adaptive operator selection: per-pool success windows and probability matching.

Six pools drive the engine pipeline (SEL, VAR, LS, REP, RED, IMM). Each
tracks a sliding window of outcome flags per operator; selection samples
operators proportionally to Laplace-smoothed window success rates, with a
probability floor so no operator starves.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractViolation

POOL_KINDS = ("SEL", "VAR", "LS", "REP", "RED", "IMM")


@dataclass(frozen=True)
class OperatorPool:
    """Operator identifiers plus per-operator outcome windows (oldest first)."""

    kind: str
    operators: tuple[str, ...]
    window: int = 50
    p_min: float = 0.05
    outcomes: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in POOL_KINDS:
            raise ContractViolation(f"unknown pool kind {self.kind!r}")
        if not self.operators:
            raise ContractViolation("operator pool must not be empty")
        if len(set(self.operators)) != len(self.operators):
            raise ContractViolation("duplicate operator identifiers in pool")
        if self.window < 1:
            raise ContractViolation(f"window must be >= 1, got {self.window}")
        if not 0.0 <= self.p_min <= 1.0 / len(self.operators):
            raise ContractViolation(
                f"p_min must lie in [0, 1/{len(self.operators)}], got {self.p_min}"
            )
        if not self.outcomes:
            object.__setattr__(self, "outcomes", tuple(() for _ in self.operators))
        elif len(self.outcomes) != len(self.operators):
            raise ContractViolation("one outcome window required per operator")

    def operator_index(self, op: str) -> int:
        try:
            return self.operators.index(op)
        except ValueError:
            raise ContractViolation(f"operator {op!r} not in {self.kind} pool") from None


def success_rates(pool: OperatorPool) -> np.ndarray:
    """Laplace-smoothed window success rate per operator: (wins + 1) / (trials + 2)."""
    rates = np.empty(len(pool.operators))
    for i, window in enumerate(pool.outcomes):
        rates[i] = (sum(window) + 1.0) / (len(window) + 2.0)
    return rates


def probabilities(pool: OperatorPool) -> np.ndarray:
    """Selection probabilities: p_i = p_min + (1 - k*p_min) * s_i / sum(s)."""
    rates = success_rates(pool)
    k = len(pool.operators)
    return pool.p_min + (1.0 - k * pool.p_min) * rates / rates.sum()


def choose(pool: OperatorPool, rng) -> str:
    """Sample one operator with a single rng draw (cumulative inversion)."""
    draw = rng.random()
    cumulative = 0.0
    probs = probabilities(pool)
    for op, p in zip(pool.operators, probs):
        cumulative += p
        if draw < cumulative:
            return op
    return pool.operators[-1]  # guard against cumulative rounding just below 1


def report(pool: OperatorPool, op: str, success: bool) -> OperatorPool:
    """Push an outcome flag into the operator's window, evicting beyond W."""
    idx = pool.operator_index(op)
    windows = list(pool.outcomes)
    windows[idx] = (windows[idx] + (1 if success else 0,))[-pool.window :]
    return replace(pool, outcomes=tuple(windows))
