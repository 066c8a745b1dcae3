"""Token budget allocation across frame groups.

The total budget first pays for one boundary marker per group. What remains
is split proportionally to a softmax over normalized group uniqueness and
floored to integers. A deterministic redistribution then hands floor residue
and cap overflow back to groups that still have room, in rounds of even
shares with remainders going to the lowest group indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError
from .kernels import token_uniqueness

__all__ = [
    "AllocationPlan",
    "frame_uniqueness",
    "normalize_uniqueness",
    "allocate",
    "allocate_uniform",
]


@dataclass(frozen=True)
class AllocationPlan:
    """Integer per-group budgets plus the bookkeeping behind them.

    ``raw_budgets`` records the plain softmax floors before the minimum of
    one token per group and the per-frame cap were enforced, which is what
    monotonicity diagnostics look at.
    """

    budgets: tuple[int, ...]
    token_max: int
    boundary_overhead: int
    waste_redistributed: int
    raw_budgets: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.budgets)

    @property
    def num_groups(self) -> int:
        return len(self.budgets)


def frame_uniqueness(representatives) -> np.ndarray:
    """Mean dissimilarity of each group representative against all of them.

    ``representatives`` is a (K, d_g) stack of global features; the self
    term contributes zero to each mean.
    """
    return token_uniqueness(representatives, name="representatives")


def normalize_uniqueness(values) -> np.ndarray:
    """Center uniqueness scores and rescale by sqrt(K).

    The rescale keeps the spread of the scores comparable across different
    group counts, so one softmax temperature works for all of them.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty vector of scores, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("scores contain non-finite entries")
    return (v - v.mean()) * math.sqrt(v.size)


def _stable_softmax(v: np.ndarray) -> np.ndarray:
    z = v - v.max()
    e = np.exp(z)
    return e / e.sum()


def _validate_budget_inputs(num_groups: int, token_max: int, per_frame_cap: int) -> int:
    if num_groups < 1:
        raise ValueError("need at least one group")
    if per_frame_cap < 1:
        raise ValueError(f"per_frame_cap must be at least 1, got {per_frame_cap}")
    if token_max < 2 * num_groups:
        raise BudgetError(
            "budget cannot cover one token plus marker per group: "
            f"token_max={token_max}, groups={num_groups}"
        )
    return token_max - num_groups


def _take_back(budgets: np.ndarray, deficit: int) -> None:
    # The minimum-of-one rule can overshoot the distributable budget when a
    # few groups dominate the softmax. Walk tokens back from the largest
    # budgets, breaking ties toward the highest index so low indices keep
    # their preference.
    while deficit > 0:
        candidates = np.flatnonzero(budgets > 1)
        largest = candidates[budgets[candidates] == budgets[candidates].max()]
        budgets[int(largest[-1])] -= 1
        deficit -= 1


def _redistribute(budgets: np.ndarray, spare: int, cap: int) -> int:
    """Spread ``spare`` tokens over budgets below ``cap``; returns the amount used."""
    used = 0
    while spare > 0:
        eligible = np.flatnonzero(budgets < cap)
        if eligible.size == 0:
            break
        share = spare // eligible.size
        if share == 0:
            for i in eligible[:spare]:
                budgets[int(i)] += 1
            used += spare
            spare = 0
        else:
            for i in eligible:
                add = min(share, cap - int(budgets[int(i)]))
                budgets[int(i)] += add
                spare -= add
                used += add
    return used


def allocate(normalized_uniqueness, token_max: int, per_frame_cap: int) -> AllocationPlan:
    """Split a token budget across groups proportionally to their uniqueness.

    After reserving one marker per group, each group receives the floor of
    its softmax share. Budgets are clamped into [1, per_frame_cap] and the
    floor residue plus any cap overflow is redistributed deterministically.

    Raises:
        BudgetError: when ``token_max`` cannot fund one token and one marker
            per group.
    """
    scores = np.asarray(normalized_uniqueness, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError(f"expected a non-empty score vector, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores contain non-finite entries")
    distributable = _validate_budget_inputs(scores.size, int(token_max), int(per_frame_cap))

    shares = _stable_softmax(scores)
    raw = np.floor(shares * distributable).astype(np.int64)
    budgets = np.clip(raw, 1, per_frame_cap)
    _take_back(budgets, int(budgets.sum()) - distributable)
    used = _redistribute(budgets, distributable - int(budgets.sum()), per_frame_cap)

    return AllocationPlan(
        budgets=tuple(int(b) for b in budgets),
        token_max=int(token_max),
        boundary_overhead=scores.size,
        waste_redistributed=used,
        raw_budgets=tuple(int(b) for b in raw),
    )


def allocate_uniform(num_groups: int, token_max: int, per_frame_cap: int) -> AllocationPlan:
    """Split the budget evenly, remainder to the lowest group indices.

    Serves as the flat-allocation ablation; the same cap and marker rules
    apply as in :func:`allocate`.
    """
    distributable = _validate_budget_inputs(int(num_groups), int(token_max), int(per_frame_cap))
    base, remainder = divmod(distributable, num_groups)
    raw = np.array([base + 1 if i < remainder else base for i in range(num_groups)], dtype=np.int64)
    budgets = np.clip(raw, 1, per_frame_cap)
    used = _redistribute(budgets, distributable - int(budgets.sum()), per_frame_cap)
    return AllocationPlan(
        budgets=tuple(int(b) for b in budgets),
        token_max=int(token_max),
        boundary_overhead=int(num_groups),
        waste_redistributed=used,
        raw_budgets=tuple(int(b) for b in raw),
    )
