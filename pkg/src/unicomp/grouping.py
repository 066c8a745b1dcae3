"""Temporal frame grouping and fusion.

A video is scanned once, front to back. A frame joins the currently open
group while its global feature stays within the dissimilarity threshold of
the group's first frame; otherwise it opens a new group. Groups are then
fused into single representatives by token-wise averaging, which keeps the
representative tensor shaped like an ordinary frame stack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFeatureError
from .kernels import as_token_matrix, pairwise_uniqueness

__all__ = [
    "VideoTensor",
    "FrameGrouping",
    "global_frame_feature",
    "group_frames",
    "group_frames_first_only",
]


@dataclass(frozen=True)
class VideoTensor:
    """Ordered stack of per-frame token matrices, shape (T, N, d).

    ``keys`` optionally carries a parallel stack of scoring features with the
    same (T, N) layout but its own width. When present, spatial compression
    measures redundancy on the keys while emitting the value features.
    """

    frames: np.ndarray
    keys: np.ndarray | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3:
            raise ValueError(f"frames must have shape (T, N, d), got {frames.shape}")
        if min(frames.shape) < 1:
            raise ValueError(f"frames must be non-empty along every axis, got {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames contain non-finite entries")
        object.__setattr__(self, "frames", frames)
        if self.keys is not None:
            keys = np.asarray(self.keys)
            if keys.ndim != 3 or keys.shape[:2] != frames.shape[:2]:
                raise ValueError(
                    f"keys must have shape (T, N, d_k) matching frames {frames.shape[:2]}, "
                    f"got {keys.shape}"
                )
            if keys.shape[2] < 1:
                raise ValueError("keys feature width must be at least 1")
            if not np.all(np.isfinite(keys)):
                raise ValueError("keys contain non-finite entries")
            object.__setattr__(self, "keys", keys)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def tokens_per_frame(self) -> int:
        return self.frames.shape[1]

    @property
    def feature_dim(self) -> int:
        return self.frames.shape[2]

    @property
    def key_dim(self) -> int:
        return 0 if self.keys is None else self.keys.shape[2]


@dataclass(frozen=True)
class FrameGrouping:
    """Contiguous partition of frame indices plus fused representatives.

    ``spans`` holds half-open [start, end) ranges covering [0, T) in order.
    ``rep_tokens`` stacks one representative frame per group; ``rep_global``
    stacks the matching global features used for downstream budget splits.
    """

    spans: tuple[tuple[int, int], ...]
    rep_tokens: np.ndarray
    rep_global: np.ndarray
    rep_keys: np.ndarray | None = None

    @property
    def num_groups(self) -> int:
        return len(self.spans)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(end - start for start, end in self.spans)


def global_frame_feature(frame) -> np.ndarray:
    """Column-wise token mean of a single frame, as float64.

    Raises:
        DegenerateFeatureError: if the mean vector has zero norm and thus
            cannot participate in angular comparisons.
    """
    arr = as_token_matrix(frame, name="frame")
    feat = arr.mean(axis=0)
    if float(np.linalg.norm(feat)) == 0.0:
        raise DegenerateFeatureError("degenerate frame feature: token mean has zero norm")
    return feat


def _video_globals(video: VideoTensor, global_features) -> np.ndarray:
    if global_features is None:
        return np.stack([global_frame_feature(f) for f in video.frames])
    feats = np.asarray(global_features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] != video.num_frames:
        raise ValueError(
            f"global_features must have shape (T, d_g) with T={video.num_frames}, "
            f"got {feats.shape}"
        )
    if not np.all(np.isfinite(feats)):
        raise ValueError("global_features contain non-finite entries")
    norms = np.linalg.norm(feats, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DegenerateFeatureError(
            f"degenerate frame feature: global_features row {int(bad[0])} has zero norm"
        )
    return feats


def _anchored_mean(stack: np.ndarray) -> np.ndarray:
    # mean accumulated as first-member + mean deviation, so a run of
    # identical frames fuses to itself bit-exactly
    return stack[0] + (stack - stack[0]).mean(axis=0)


def _scan_spans(globals_: np.ndarray, frame_threshold: float) -> tuple[tuple[int, int], ...]:
    if frame_threshold < 0.0:
        raise ValueError(f"frame_threshold must be non-negative, got {frame_threshold}")
    spans = []
    start = 0
    anchor = globals_[0]
    for t in range(1, globals_.shape[0]):
        if pairwise_uniqueness(globals_[t], anchor) >= frame_threshold:
            spans.append((start, t))
            start = t
            anchor = globals_[t]
    spans.append((start, globals_.shape[0]))
    return tuple(spans)


def group_frames(video: VideoTensor, frame_threshold: float, global_features=None) -> FrameGrouping:
    """Scan a video into groups and fuse each group by token-wise averaging.

    A new group opens at frame t exactly when the dissimilarity between its
    global feature and the global feature of the current group's first frame
    reaches ``frame_threshold``. Representatives average member frames
    token-wise; keys, when present, and global features fuse the same way.

    ``global_features`` optionally replaces the built-in token-mean pooling
    with externally supplied per-frame features of shape (T, d_g).
    """
    globals_ = _video_globals(video, global_features)
    spans = _scan_spans(globals_, frame_threshold)
    frames = np.asarray(video.frames, dtype=np.float64)
    rep_tokens = np.stack([_anchored_mean(frames[s:e]) for s, e in spans])
    rep_global = np.stack([_anchored_mean(globals_[s:e]) for s, e in spans])
    rep_keys = None
    if video.keys is not None:
        keys = np.asarray(video.keys, dtype=np.float64)
        rep_keys = np.stack([_anchored_mean(keys[s:e]) for s, e in spans])
    return FrameGrouping(spans=spans, rep_tokens=rep_tokens, rep_global=rep_global, rep_keys=rep_keys)


def group_frames_first_only(
    video: VideoTensor, frame_threshold: float, global_features=None
) -> FrameGrouping:
    """Group exactly like :func:`group_frames` but skip fusion.

    Each representative is the group's first member frame taken verbatim.
    Boundaries are identical to the fused variant because the scan never
    looks at representatives.
    """
    globals_ = _video_globals(video, global_features)
    spans = _scan_spans(globals_, frame_threshold)
    frames = np.asarray(video.frames, dtype=np.float64)
    firsts = [s for s, _ in spans]
    rep_tokens = frames[firsts].copy()
    rep_global = globals_[firsts].copy()
    rep_keys = None
    if video.keys is not None:
        rep_keys = np.asarray(video.keys, dtype=np.float64)[firsts].copy()
    return FrameGrouping(spans=spans, rep_tokens=rep_tokens, rep_global=rep_global, rep_keys=rep_keys)
