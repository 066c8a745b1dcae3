"""Greedy spatial token compression with neighbor fusion.

Tokens are visited in order of descending uniqueness. Each visited token
that has not been claimed yet is retained; every unclaimed token within the
redundancy threshold of it is claimed as its neighbor and, optionally, fused
into it by averaging. The scan stops once the budget is filled or every
token is claimed.

Two implementations share this contract. ``spatial_compress_reference``
executes the scan naively, element by element, and exists as the behavioral
yardstick. ``spatial_compress_parallel`` vectorizes the same decisions with
matrix kernels and is the one production code should call; its outputs must
match the reference token for token.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFeatureError
from .kernels import as_token_matrix, token_uniqueness, uniqueness_matrix

__all__ = [
    "CompressedFrame",
    "spatial_compress_reference",
    "spatial_compress_parallel",
    "attention_topk",
    "uniqueness_topk",
    "selection_order",
    "frames_match",
    "benchmark",
]

EMISSION_ORDERS = ("ids", "uniqueness")


@dataclass(eq=False)
class CompressedFrame:
    """Result of compressing one frame (or group representative).

    ``retained_ids`` lists the surviving token ids in emission order and
    ``retained_features`` carries one row per retained id in the same order.
    ``redundancy_map`` maps every retained id to the ids claimed into it,
    ascending; ``dropped_unclaimed`` lists ids that were neither retained
    nor claimed because the budget ran out first.
    """

    retained_ids: tuple[int, ...]
    retained_features: np.ndarray
    redundancy_map: dict[int, tuple[int, ...]] = field(default_factory=dict)
    dropped_unclaimed: tuple[int, ...] = ()

    @property
    def num_retained(self) -> int:
        return len(self.retained_ids)

    @property
    def num_fused(self) -> int:
        return sum(len(v) for v in self.redundancy_map.values())

    @property
    def num_tokens(self) -> int:
        return self.num_retained + self.num_fused + len(self.dropped_unclaimed)


def selection_order(uniqueness) -> np.ndarray:
    """Token ids sorted by descending uniqueness, ties toward the lower id."""
    scores = np.asarray(uniqueness, dtype=np.float64)
    return np.lexsort((np.arange(scores.size), -scores))


def _validate_args(n: int, budget, token_threshold: float, order: str) -> None:
    if order not in EMISSION_ORDERS:
        raise ValueError(f"order must be one of {EMISSION_ORDERS}, got {order!r}")
    if not 0.0 <= token_threshold <= 2.0:
        raise ValueError(f"token_threshold must lie in [0, 2], got {token_threshold}")
    if budget is not None and not 1 <= budget <= n:
        raise ValueError(f"budget must lie in [1, {n}], got {budget}")


def spatial_compress_reference(
    frame,
    key_frame=None,
    budget: int | None = None,
    token_threshold: float = 0.2,
    order: str = "ids",
    fuse: bool = True,
) -> CompressedFrame:
    """Sequential scalar implementation of the greedy compression scan.

    Redundancy is measured on ``key_frame`` when given, on ``frame``
    otherwise; emitted features always come from ``frame``. Fusion averages
    the pre-scan feature values of a token's neighbors, so the outcome does
    not depend on fusions performed earlier in the same scan. ``budget`` of
    None removes the retention cap and the scan runs until every token is
    claimed.
    """
    feats = as_token_matrix(frame, name="frame").tolist()
    n = len(feats)
    d = len(feats[0])
    if key_frame is not None:
        graph_rows = as_token_matrix(key_frame, name="key_frame")
        if graph_rows.shape[0] != n:
            raise ValueError(
                f"key_frame must cover the same {n} tokens, got {graph_rows.shape[0]}"
            )
        graph_rows = graph_rows.tolist()
    else:
        graph_rows = feats
    _validate_args(n, budget, token_threshold, order)

    norms = []
    for i, row in enumerate(graph_rows):
        norm = math.sqrt(sum(v * v for v in row))
        if norm == 0.0:
            raise DegenerateFeatureError(f"degenerate feature vector: row {i} has zero norm")
        norms.append(norm)

    dissim = [[0.0] * n for _ in range(n)]
    for i in range(n):
        row_i = graph_rows[i]
        for j in range(i + 1, n):
            row_j = graph_rows[j]
            dot = 0.0
            for a, b in zip(row_i, row_j):
                dot += a * b
            cos = dot / (norms[i] * norms[j])
            cos = min(1.0, max(-1.0, cos))
            value = 1.0 - cos
            dissim[i][j] = value
            dissim[j][i] = value

    scores = [sum(row) / n for row in dissim]
    visit = sorted(range(n), key=lambda i: (-scores[i], i))

    claimed = [False] * n
    retained: list[int] = []
    redundancy: dict[int, tuple[int, ...]] = {}
    fused_rows: dict[int, list[float]] = {}
    for i in visit:
        if claimed[i]:
            continue
        claimed[i] = True
        retained.append(i)
        neighbors = [j for j in range(n) if not claimed[j] and dissim[i][j] < token_threshold]
        for j in neighbors:
            claimed[j] = True
        redundancy[i] = tuple(neighbors)
        if fuse and neighbors:
            mean = [0.0] * d
            for j in neighbors:
                row = feats[j]
                for c in range(d):
                    mean[c] += row[c]
            inv = 1.0 / len(neighbors)
            fused_rows[i] = [0.5 * (feats[i][c] + mean[c] * inv) for c in range(d)]
        if budget is not None and len(retained) == budget:
            break

    emit = sorted(retained) if order == "ids" else list(retained)
    rows = [fused_rows.get(i, feats[i]) for i in emit]
    dropped = tuple(j for j in range(n) if not claimed[j])
    return CompressedFrame(
        retained_ids=tuple(emit),
        retained_features=np.array(rows, dtype=np.float64).reshape(len(emit), d),
        redundancy_map=redundancy,
        dropped_unclaimed=dropped,
    )


def spatial_compress_parallel(
    frame,
    key_frame=None,
    budget: int | None = None,
    token_threshold: float = 0.2,
    order: str = "ids",
    fuse: bool = True,
) -> CompressedFrame:
    """Vectorized twin of :func:`spatial_compress_reference`.

    The uniqueness graph, visit order, neighborhood claims, and fusion all
    run as matrix operations; only the retain-or-skip walk stays a loop, and
    it touches each token once.
    """
    x = as_token_matrix(frame, name="frame")
    n = x.shape[0]
    if key_frame is not None:
        keys = as_token_matrix(key_frame, name="key_frame")
        if keys.shape[0] != n:
            raise ValueError(f"key_frame must cover the same {n} tokens, got {keys.shape[0]}")
    else:
        keys = x
    _validate_args(n, budget, token_threshold, order)

    graph = uniqueness_matrix(keys, name="key_frame" if key_frame is not None else "frame")
    scores = graph.mean(axis=1)
    visit = selection_order(scores)

    adjacent = graph < token_threshold
    np.fill_diagonal(adjacent, False)

    claimed = np.zeros(n, dtype=bool)
    retained: list[int] = []
    redundancy: dict[int, tuple[int, ...]] = {}
    for i in visit:
        if claimed[i]:
            continue
        claimed[i] = True
        retained.append(int(i))
        fresh = adjacent[i] & ~claimed
        redundancy[int(i)] = tuple(int(j) for j in np.flatnonzero(fresh))
        claimed |= fresh
        if budget is not None and len(retained) == budget:
            break

    emit = sorted(retained) if order == "ids" else retained
    features = x[emit].copy()
    if fuse:
        fused_rows = [k for k, i in enumerate(emit) if redundancy[i]]
        if fused_rows:
            weights = np.zeros((len(fused_rows), n))
            for r, k in enumerate(fused_rows):
                neighbors = list(redundancy[emit[k]])
                weights[r, neighbors] = 1.0 / len(neighbors)
            features[fused_rows] = 0.5 * features[fused_rows] + 0.5 * (weights @ x)

    dropped = tuple(int(j) for j in np.flatnonzero(~claimed))
    return CompressedFrame(
        retained_ids=tuple(emit),
        retained_features=features,
        redundancy_map=redundancy,
        dropped_unclaimed=dropped,
    )


def frames_match(a: CompressedFrame, b: CompressedFrame, atol: float = 1e-6) -> bool:
    """True when two results agree exactly on structure and on features to ``atol``."""
    return (
        a.retained_ids == b.retained_ids
        and a.dropped_unclaimed == b.dropped_unclaimed
        and a.redundancy_map == b.redundancy_map
        and a.retained_features.shape == b.retained_features.shape
        and bool(np.all(np.abs(a.retained_features - b.retained_features) <= atol))
    )


def benchmark(
    n: int = 256,
    budget: int = 64,
    dim: int = 32,
    token_threshold: float = 0.2,
    repeat: int = 20,
    seed: int = 0,
) -> dict:
    """Time the reference scan against the vectorized one on a random frame.

    Returns median wall-times in milliseconds, their ratio, and how many of
    the repeats produced diverging outputs (always expected to be zero).
    """
    import time

    rng = np.random.default_rng(seed)
    frame = rng.normal(size=(n, dim))

    reference_ms = []
    parallel_ms = []
    mismatches = 0
    for _ in range(repeat):
        t0 = time.perf_counter()
        ref = spatial_compress_reference(frame, budget=budget, token_threshold=token_threshold)
        t1 = time.perf_counter()
        par = spatial_compress_parallel(frame, budget=budget, token_threshold=token_threshold)
        t2 = time.perf_counter()
        reference_ms.append((t1 - t0) * 1e3)
        parallel_ms.append((t2 - t1) * 1e3)
        if not frames_match(ref, par):
            mismatches += 1

    ref_median = float(np.median(reference_ms))
    par_median = float(np.median(parallel_ms))
    return {
        "n": n,
        "budget": budget,
        "dim": dim,
        "token_threshold": token_threshold,
        "repeat": repeat,
        "reference_ms": ref_median,
        "parallel_ms": par_median,
        "speedup": ref_median / par_median,
        "mismatches": mismatches,
    }


def _topk_frame(x: np.ndarray, scores: np.ndarray, budget: int) -> CompressedFrame:
    keep = sorted(int(i) for i in selection_order(scores)[:budget])
    dropped = tuple(j for j in range(x.shape[0]) if j not in set(keep))
    return CompressedFrame(
        retained_ids=tuple(keep),
        retained_features=x[keep].copy(),
        redundancy_map={i: () for i in keep},
        dropped_unclaimed=dropped,
    )


def attention_topk(frame, scores, budget: int) -> CompressedFrame:
    """Keep the ``budget`` tokens with the highest externally supplied scores.

    Ties resolve toward the lower id; no fusion takes place and every other
    token is dropped unclaimed.
    """
    x = as_token_matrix(frame, name="frame")
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size != x.shape[0]:
        raise ValueError(f"scores must be a vector of length {x.shape[0]}, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain non-finite entries")
    _validate_args(x.shape[0], budget, 0.0, "ids")
    return _topk_frame(x, s, budget)


def uniqueness_topk(frame, key_frame=None, budget: int = 1) -> CompressedFrame:
    """Keep the ``budget`` most unique tokens; no claiming, no fusion.

    Matches the greedy scan run with a zero redundancy threshold and fusion
    disabled, and serves as that ablation's closed form.
    """
    x = as_token_matrix(frame, name="frame")
    if key_frame is not None:
        keys = as_token_matrix(key_frame, name="key_frame")
        if keys.shape[0] != x.shape[0]:
            raise ValueError(
                f"key_frame must cover the same {x.shape[0]} tokens, got {keys.shape[0]}"
            )
    else:
        keys = x
    _validate_args(x.shape[0], budget, 0.0, "ids")
    scores = token_uniqueness(keys, name="key_frame" if key_frame is not None else "frame")
    return _topk_frame(x, scores, budget)
