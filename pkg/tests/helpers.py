"""Shared fixtures and independent oracles for the test suite.

Oracles here are deliberately naive (double loops, exhaustive scans) so they
stay an independent route from the vectorized implementations they check.
"""

from __future__ import annotations

import math

import numpy as np


def naive_cosine(a, b) -> float:
    dot = sum(float(x) * float(y) for x, y in zip(a, b))
    na = math.sqrt(sum(float(x) * float(x) for x in a))
    nb = math.sqrt(sum(float(y) * float(y) for y in b))
    return min(1.0, max(-1.0, dot / (na * nb)))


def naive_uniqueness_matrix(tokens) -> np.ndarray:
    x = np.asarray(tokens, dtype=np.float64)
    n = x.shape[0]
    u = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                u[i, j] = 1.0 - naive_cosine(x[i], x[j])
    return u


def naive_token_uniqueness(tokens) -> np.ndarray:
    u = naive_uniqueness_matrix(tokens)
    n = u.shape[0]
    return np.array([sum(u[i]) / n for i in range(n)])


def naive_reconstruction_error(tokens, selected, scheme: str) -> float:
    """Per-token loop reconstruction, summing squared residuals."""
    x = np.asarray(tokens, dtype=np.float64)
    x = x / np.linalg.norm(x, axis=1, keepdims=True)
    ids = sorted(selected)
    total = 0.0
    for j in range(x.shape[0]):
        sims = [naive_cosine(x[i], x[j]) for i in ids]
        if scheme == "nearest":
            best = max(range(len(ids)), key=lambda k: (sims[k], -k))
            approx = x[ids[best]]
        else:
            peak = max(sims)
            weights = [math.exp(s - peak) for s in sims]
            z = sum(weights)
            approx = sum((w / z) * x[i] for w, i in zip(weights, ids))
        total += float(np.sum((x[j] - approx) ** 2))
    return total


def naive_uniqueness_bound(tokens, selected) -> float:
    u = naive_uniqueness_matrix(tokens)
    ids = sorted(selected)
    return 2.0 * sum(min(u[i, j] for i in ids) for j in range(u.shape[0]))


def naive_greedy(tokens, budget, threshold: float):
    """Exhaustive simulation of the greedy claim loop.

    Returns (retained ids in selection order, redundancy map, dropped ids),
    built purely from the naive uniqueness matrix.
    """
    u = naive_uniqueness_matrix(tokens)
    n = u.shape[0]
    scores = [sum(u[i]) / n for i in range(n)]
    visit = sorted(range(n), key=lambda i: (-scores[i], i))
    claimed = set()
    retained = []
    redundancy = {}
    for i in visit:
        if i in claimed:
            continue
        claimed.add(i)
        retained.append(i)
        neighbors = tuple(j for j in range(n) if j not in claimed and u[i][j] < threshold)
        claimed.update(neighbors)
        redundancy[i] = neighbors
        if budget is not None and len(retained) == budget:
            break
    dropped = tuple(j for j in range(n) if j not in claimed)
    return retained, redundancy, dropped


def unit_tokens(rng, n: int, d: int) -> np.ndarray:
    x = rng.normal(size=(n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def cluster_frame(rng, num_clusters: int, per_cluster: int, d: int, jitter: float = 0.05):
    """Tokens in well-separated angular clusters.

    Anchors are orthonormal (inter-cluster dissimilarity near 1); members
    jitter around an anchor tightly enough that intra-cluster dissimilarity
    stays far below 0.2. Returns (tokens, labels).
    """
    assert d >= num_clusters
    basis, _ = np.linalg.qr(rng.normal(size=(d, d)))
    anchors = basis[:num_clusters]
    rows = []
    labels = []
    for c in range(num_clusters):
        for _ in range(per_cluster):
            noisy = anchors[c] + jitter * rng.normal(size=d)
            rows.append(noisy / np.linalg.norm(noisy))
            labels.append(c)
    order = rng.permutation(len(rows))
    tokens = np.array(rows)[order]
    labels = np.array(labels)[order]
    return tokens, labels


def scene_video(rng, block_sizes, n: int, d: int, frame_noise: float = 0.0) -> np.ndarray:
    """Frames in consecutive scenes; scenes are orthogonal directions.

    Within a scene, frames repeat the scene's token matrix with optional
    small noise, so grouping should fold each scene into one group.
    """
    assert d >= 2 * len(block_sizes)
    basis, _ = np.linalg.qr(rng.normal(size=(d, d)))
    frames = []
    for b, size in enumerate(block_sizes):
        base = np.abs(rng.normal(size=(n, 1))) + 0.5
        scene = base * basis[b]
        for _ in range(size):
            frame = scene.copy()
            if frame_noise:
                frame = frame + frame_noise * rng.normal(size=(n, d))
            frames.append(frame)
    return np.stack(frames)
