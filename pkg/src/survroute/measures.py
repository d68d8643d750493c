"""Front quality indicators: exact hypervolume (2-D/3-D), additive epsilon, coverage.

Hypervolume drives the engine's stagnation detection and RED/IMM credit;
epsilon and coverage are reporting-only indicators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import ContractViolation
from .moo import ObjectiveVector


@dataclass(frozen=True)
class ReferencePoint:
    """Hypervolume reference; must be strictly worse than every front member."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        if len(self.values) < 1:
            raise ContractViolation("reference point must have at least one component")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def _front_matrix(front: Iterable, n_obj: int | None = None) -> np.ndarray:
    rows = []
    for point in front:
        values = point.values if isinstance(point, ObjectiveVector) else tuple(point)
        rows.append([float(v) for v in values])
    if not rows:
        return np.zeros((0, n_obj or 0), dtype=np.float64)
    if len({len(r) for r in rows}) != 1:
        raise ContractViolation("front mixes objective lengths")
    F = np.asarray(rows, dtype=np.float64)
    if n_obj is not None and F.shape[1] != n_obj:
        raise ContractViolation(f"front has {F.shape[1]} objectives, expected {n_obj}")
    return F


def _ref_values(ref) -> np.ndarray:
    if isinstance(ref, ReferencePoint):
        return ref.as_array()
    return np.asarray([float(v) for v in ref], dtype=np.float64)


def _hv2d(F: np.ndarray, ref: np.ndarray) -> float:
    # clean defensively: dedupe, drop dominated rows, sort by first objective
    if F.shape[0] == 0:
        return 0.0
    F = np.unique(F, axis=0)
    F = F[kernels.nondominated_mask(F)]
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    return float(kernels.hv2d_sweep(F, float(ref[0]), float(ref[1])))


def _hv3d(F: np.ndarray, ref: np.ndarray) -> float:
    # sweep ascending third objective, integrating 2-D slabs
    if F.shape[0] == 0:
        return 0.0
    levels = np.unique(F[:, 2])
    bounds = np.append(levels, ref[2])
    vol = 0.0
    for k, level in enumerate(levels):
        height = bounds[k + 1] - bounds[k]
        if height <= 0.0:
            continue
        active = F[F[:, 2] <= level][:, :2]
        vol += _hv2d(active, ref[:2]) * height
    return vol


def hypervolume(front: Iterable, ref) -> float:
    """Exact hypervolume of a mutually nondominated front vs a reference point.

    Supports 2 and 3 objectives. Every front member must strictly dominate
    the reference in all components, else the call is rejected.
    """
    r = _ref_values(ref)
    if len(r) not in (2, 3):
        raise ContractViolation(f"hypervolume supports 2 or 3 objectives, got {len(r)}")
    F = _front_matrix(front, n_obj=len(r))
    if F.shape[0] == 0:
        return 0.0
    if not bool((F < r).all()):
        worst = F[(F >= r).any(axis=1)][0]
        raise ContractViolation(
            f"reference point {tuple(r)} is not strictly dominated by front point {tuple(worst)}"
        )
    return _hv2d(F, r) if len(r) == 2 else _hv3d(F, r)


def hypervolume_clipped(front: Iterable, ref) -> float:
    """Hypervolume of the subset strictly dominating the reference.

    Points at or beyond the reference contribute nothing instead of raising;
    this is the progress-trace variant used inside the engine, where late
    archive entries may fall outside the frozen reference box.
    """
    r = _ref_values(ref)
    if len(r) not in (2, 3):
        raise ContractViolation(f"hypervolume supports 2 or 3 objectives, got {len(r)}")
    F = _front_matrix(front, n_obj=len(r))
    if F.shape[0] == 0:
        return 0.0
    F = F[(F < r).all(axis=1)]
    if F.shape[0] == 0:
        return 0.0
    return _hv2d(F, r) if len(r) == 2 else _hv3d(F, r)


def additive_epsilon(approx: Iterable, reference_front: Iterable) -> float:
    """Smallest shift after which the approximation weakly dominates the reference.

    max over reference points of min over approx points of max-coordinate
    difference (approx - reference). Signed: negative means the approximation
    strictly improves on the reference front.
    """
    A = _front_matrix(approx)
    R = _front_matrix(reference_front)
    if A.shape[0] == 0:
        raise ContractViolation("approximation front is empty")
    if R.shape[0] == 0:
        raise ContractViolation("reference front is empty")
    if A.shape[1] != R.shape[1]:
        raise ContractViolation(f"objective count mismatch: {A.shape[1]} vs {R.shape[1]}")
    diff = (A[:, None, :] - R[None, :, :]).max(axis=2)
    return float(diff.min(axis=0).max())


def coverage(a: Iterable, b: Iterable) -> float:
    """Fraction of b's points weakly dominated by at least one point of a."""
    A = _front_matrix(a)
    B = _front_matrix(b)
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise ContractViolation("coverage requires non-empty fronts")
    if A.shape[1] != B.shape[1]:
        raise ContractViolation(f"objective count mismatch: {A.shape[1]} vs {B.shape[1]}")
    covered = (A[:, None, :] <= B[None, :, :]).all(axis=2).any(axis=0)
    return float(covered.sum() / B.shape[0])
