"""Reference selectors for ablations and comparison baselines."""

from __future__ import annotations

import numpy as np

from .kernels import as_token_matrix
from .spatial import CompressedFrame, attention_topk, uniqueness_topk

__all__ = ["random_selection", "attention_topk", "uniqueness_topk"]


def random_selection(frame, budget: int, seed: int = 0) -> CompressedFrame:
    """Keep a uniform random subset of ``budget`` tokens, reproducibly.

    The same seed always yields the same subset. Ids are emitted in
    ascending order; nothing is fused.
    """
    x = as_token_matrix(frame, name="frame")
    n = x.shape[0]
    if not 1 <= budget <= n:
        raise ValueError(f"budget must lie in [1, {n}], got {budget}")
    rng = np.random.default_rng(seed)
    keep = sorted(int(i) for i in rng.choice(n, size=budget, replace=False))
    dropped = tuple(j for j in range(n) if j not in set(keep))
    return CompressedFrame(
        retained_ids=tuple(keep),
        retained_features=x[keep].copy(),
        redundancy_map={i: () for i in keep},
        dropped_unclaimed=dropped,
    )
