"""Numerical kernels: uniqueness scores, reconstruction, and error bounds.

Everything here is a pure function over in-memory arrays. Inputs are cast to
float64 before any accumulation, so results agree with the naive double-loop
oracles in the test suite to 1e-6 absolute even when the source data is
float32.

Reconstruction and bound operations scale token rows to unit Euclidean norm
internally. The scalars they return therefore describe the angular geometry
of the input, not its raw magnitudes; callers that need the normalization
recorded should keep the convention in mind when reporting.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateFeatureError, SelectionError

__all__ = [
    "pairwise_uniqueness",
    "uniqueness_matrix",
    "token_uniqueness",
    "reconstruction",
    "reconstruction_error",
    "uniqueness_bound",
    "softmax_residual_bound",
    "as_token_matrix",
    "unit_rows",
    "selection_ids",
]

RECONSTRUCTION_SCHEMES = ("softmax", "nearest")


def as_token_matrix(tokens, name: str = "tokens") -> np.ndarray:
    """Validate an (N, d) token matrix and return it as float64."""
    arr = np.asarray(tokens, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def unit_rows(tokens, name: str = "tokens") -> np.ndarray:
    """Float64 copy of ``tokens`` with rows scaled to unit Euclidean norm."""
    arr = as_token_matrix(tokens, name=name)
    norms = np.linalg.norm(arr, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DegenerateFeatureError(
            f"degenerate feature vector: {name} row {int(bad[0])} has zero norm"
        )
    return arr / norms[:, None]


def selection_ids(selected, n: int) -> np.ndarray:
    """Validate a token selection against ``n`` tokens.

    Returns the ids sorted ascending; the emission order of a selection is a
    presentation concern and never changes reconstruction results.
    """
    ids = np.asarray(list(selected), dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise SelectionError("selection must contain at least one token id")
    if np.unique(ids).size != ids.size:
        raise SelectionError("selection contains duplicate token ids")
    if ids.min() < 0 or ids.max() >= n:
        raise SelectionError(
            f"selection ids must lie in [0, {n}), got range "
            f"[{int(ids.min())}, {int(ids.max())}]"
        )
    return np.sort(ids)


def pairwise_uniqueness(x, y) -> float:
    """Angular dissimilarity ``1 - cos(x, y)``, clamped into [0, 2].

    Raises:
        DegenerateFeatureError: if either vector has zero norm.
    """
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"expected two vectors of equal length, got {a.shape} and {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("vectors contain non-finite entries")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DegenerateFeatureError("degenerate feature vector: zero norm")
    cos = float(np.dot(a, b) / (na * nb))
    cos = min(1.0, max(-1.0, cos))
    return 1.0 - cos


def uniqueness_matrix(tokens, name: str = "tokens") -> np.ndarray:
    """Symmetric (N, N) matrix of pairwise angular dissimilarities.

    Entries live in [0, 2] and the diagonal is exactly zero.
    """
    xn = unit_rows(tokens, name=name)
    gram = np.clip(xn @ xn.T, -1.0, 1.0)
    u = 1.0 - gram
    # gemm may differ across triangles by an ulp; force exact symmetry
    u = 0.5 * (u + u.T)
    np.fill_diagonal(u, 0.0)
    return u


def token_uniqueness(tokens, name: str = "tokens") -> np.ndarray:
    """Per-token uniqueness: mean dissimilarity against every token.

    The self term is included in the mean and contributes zero, so values
    stay below ``2 * (N - 1) / N``.
    """
    return uniqueness_matrix(tokens, name=name).mean(axis=1)


def _selection_similarities(tokens, selected):
    xn = unit_rows(tokens)
    ids = selection_ids(selected, xn.shape[0])
    sims = np.clip(xn[ids] @ xn.T, -1.0, 1.0)
    return xn, ids, sims


def _softmax_columns(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


def reconstruction(tokens, selected, scheme: str = "softmax") -> np.ndarray:
    """Reconstruct every token from the selected subset.

    Tokens are normalized to unit rows first. Under ``softmax`` each token j
    becomes a convex combination of the selected rows with weights
    ``softmax_i(cos(x_i, x_j))``; under ``nearest`` it becomes its most
    similar selected row, ties resolved toward the lowest token id.

    Returns:
        (N, d) float64 matrix of reconstructed unit-geometry tokens.
    """
    if scheme not in RECONSTRUCTION_SCHEMES:
        raise ValueError(f"unknown reconstruction scheme {scheme!r}")
    xn, ids, sims = _selection_similarities(tokens, selected)
    if scheme == "nearest":
        # rows of sims follow ascending ids, so argmax's first-hit rule
        # lands on the lowest id among ties
        pick = np.argmax(sims, axis=0)
        return xn[ids[pick]]
    weights = _softmax_columns(sims)
    return weights.T @ xn[ids]


def reconstruction_error(tokens, selected, scheme: str = "softmax") -> float:
    """Total squared residual of reconstructing all tokens from ``selected``."""
    xn = unit_rows(tokens)
    xhat = reconstruction(tokens, selected, scheme=scheme)
    return float(np.sum((xn - xhat) ** 2))


def uniqueness_bound(tokens, selected) -> float:
    """Redundancy bound ``2 * sum_j min_{i in S} u_ij``.

    Equals ``reconstruction_error(..., scheme="nearest")`` exactly, and
    upper-bounds it for any scheme that snaps each token to one selected row.
    """
    u = uniqueness_matrix(tokens)
    ids = selection_ids(selected, u.shape[0])
    return float(2.0 * np.sum(u[ids, :].min(axis=0)))


def softmax_residual_bound(tokens, selected) -> float:
    """Residual bound ``sum_j 2 * (1 - sum_i w_ij s_ij)`` for softmax weights.

    Dropping the quadratic cross-term of the expanded residual leaves this
    quantity, which can never fall below the true softmax reconstruction
    error.
    """
    xn, ids, sims = _selection_similarities(tokens, selected)
    weights = _softmax_columns(sims)
    n = xn.shape[0]
    return float(2.0 * (n - np.sum(weights * sims)))
