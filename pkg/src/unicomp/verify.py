"""Randomized self-checks for the reconstruction bound identities.

Three statements are enforced on every trial:

  1. nearest identity: the nearest-scheme reconstruction error equals the
     uniqueness bound to 1e-6 absolute,
  2. residual bound: the softmax reconstruction error never exceeds the
     softmax residual bound by more than 1e-6,
  3. monotone bound: growing a selection never increases the uniqueness
     bound.

The softmax error occasionally exceeding the min-based uniqueness bound is
expected behavior, not a defect, so its frequency is only counted and
reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = ["BoundCheckResult", "run_bound_checks"]

ABS_TOL = 1e-6
MONOTONE_SLACK = 1e-9


@dataclass
class BoundCheckResult:
    trials: int
    violations: list[dict] = field(default_factory=list)
    max_nearest_deviation: float = 0.0
    softmax_exceedances: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_case(tokens: np.ndarray, selected: list[int], result: BoundCheckResult, label: str):
    bound = kernels.uniqueness_bound(tokens, selected)
    nearest = kernels.reconstruction_error(tokens, selected, scheme="nearest")
    deviation = abs(nearest - bound)
    result.max_nearest_deviation = max(result.max_nearest_deviation, deviation)
    if deviation > ABS_TOL:
        result.violations.append(
            {
                "check": "nearest-identity",
                "case": label,
                "selected": list(map(int, selected)),
                "error": nearest,
                "bound": bound,
                "tokens": tokens.tolist(),
            }
        )

    softmax_error = kernels.reconstruction_error(tokens, selected, scheme="softmax")
    residual = kernels.softmax_residual_bound(tokens, selected)
    if softmax_error > residual + ABS_TOL:
        result.violations.append(
            {
                "check": "residual-bound",
                "case": label,
                "selected": list(map(int, selected)),
                "error": softmax_error,
                "bound": residual,
                "tokens": tokens.tolist(),
            }
        )
    if softmax_error > bound:
        result.softmax_exceedances += 1


def _check_monotone(tokens: np.ndarray, smaller: list[int], larger: list[int], result, label: str):
    lo = kernels.uniqueness_bound(tokens, larger)
    hi = kernels.uniqueness_bound(tokens, smaller)
    if lo > hi + MONOTONE_SLACK:
        result.violations.append(
            {
                "check": "monotone-bound",
                "case": label,
                "selected": list(map(int, smaller)),
                "superset": list(map(int, larger)),
                "bound_small": hi,
                "bound_large": lo,
                "tokens": tokens.tolist(),
            }
        )


def run_bound_checks(
    trials: int = 1000,
    max_tokens: int = 32,
    max_dim: int = 16,
    seed: int = 0,
    extra_frames=None,
) -> BoundCheckResult:
    """Fuzz the bound invariants on random unit tokens.

    ``extra_frames`` optionally adds concrete (N, d) matrices, each checked
    with a random selection, on top of the randomized trials.
    """
    rng = np.random.default_rng(seed)
    result = BoundCheckResult(trials=trials)

    def random_selection(n: int) -> list[int]:
        size = int(rng.integers(1, n + 1))
        return sorted(int(i) for i in rng.choice(n, size=size, replace=False))

    for trial in range(trials):
        n = int(rng.integers(2, max_tokens + 1))
        d = int(rng.integers(2, max_dim + 1))
        tokens = rng.normal(size=(n, d))
        tokens /= np.linalg.norm(tokens, axis=1, keepdims=True)
        selected = random_selection(n)
        _check_case(tokens, selected, result, f"trial {trial}")
        if len(selected) < n:
            remaining = [i for i in range(n) if i not in set(selected)]
            extra = int(rng.integers(1, len(remaining) + 1))
            grown = sorted(selected + [int(i) for i in rng.choice(remaining, size=extra, replace=False)])
            _check_monotone(tokens, selected, grown, result, f"trial {trial}")

    for idx, frame in enumerate(extra_frames or []):
        tokens = np.asarray(frame, dtype=np.float64)
        result.trials += 1
        _check_case(tokens, random_selection(tokens.shape[0]), result, f"input frame {idx}")

    return result
