"""End-to-end compression: group frames, split the budget, compress, account.

Budgeted mode caps the emitted stream (retained tokens plus one boundary
marker per group) at ``token_max``, which may also be given as a retain
ratio against the original token count. When grouping alone already fits
the budget, allocation and spatial compression are bypassed and the fused
groups are emitted whole. Auto mode skips budgeting entirely and lets the
greedy scan run until every token is claimed, so the output size follows
the redundancy actually present in the video.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .allocation import AllocationPlan, allocate, allocate_uniform, frame_uniqueness, normalize_uniqueness
from .errors import ConfigError
from .grouping import FrameGrouping, VideoTensor, group_frames, group_frames_first_only
from .kernels import reconstruction_error, uniqueness_bound
from .spatial import CompressedFrame, spatial_compress_parallel

__all__ = [
    "CompressionConfig",
    "CompressionReport",
    "CompressedVideo",
    "compress",
    "analyze",
]

SURPLUS_ROUNDS = 3

MODES = ("budgeted", "auto")
GROUPINGS = ("fusion", "first")
ALLOCATIONS = ("softmax", "uniform")


@dataclass(frozen=True)
class CompressionConfig:
    """Knobs for one compression run.

    Budgeted mode needs exactly one of ``retain_ratio`` (fraction of the
    original token count) or ``token_max`` (absolute emitted-stream cap);
    auto mode accepts neither.
    """

    frame_threshold: float = 0.005
    token_threshold: float = 0.2
    retain_ratio: float | None = None
    token_max: int | None = None
    mode: str = "budgeted"
    order: str = "ids"
    fuse: bool = True
    grouping: str = "fusion"
    allocation: str = "softmax"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.grouping not in GROUPINGS:
            raise ConfigError(f"grouping must be one of {GROUPINGS}, got {self.grouping!r}")
        if self.allocation not in ALLOCATIONS:
            raise ConfigError(f"allocation must be one of {ALLOCATIONS}, got {self.allocation!r}")
        if self.order not in ("ids", "uniqueness"):
            raise ConfigError(f"order must be 'ids' or 'uniqueness', got {self.order!r}")
        if self.frame_threshold < 0.0:
            raise ConfigError(f"frame_threshold must be non-negative, got {self.frame_threshold}")
        if not 0.0 <= self.token_threshold <= 2.0:
            raise ConfigError(f"token_threshold must lie in [0, 2], got {self.token_threshold}")
        if self.mode == "budgeted":
            if (self.retain_ratio is None) == (self.token_max is None):
                raise ConfigError("budgeted mode needs exactly one of retain_ratio or token_max")
            if self.retain_ratio is not None and not 0.0 < self.retain_ratio <= 1.0:
                raise ConfigError(f"retain_ratio must lie in (0, 1], got {self.retain_ratio}")
            if self.token_max is not None and self.token_max < 1:
                raise ConfigError(f"token_max must be positive, got {self.token_max}")
        else:
            if self.retain_ratio is not None or self.token_max is not None:
                raise ConfigError("auto mode accepts neither retain_ratio nor token_max")


@dataclass
class CompressionReport:
    """Accounting for one run: per-group rows plus stream-level totals.

    ``groups`` rows carry the frame range, allocated budget, retained and
    fused counts, and the nearest-scheme reconstruction error together with
    its uniqueness bound, both measured on the group representative's
    normalized tokens. ``timings_ms`` is wall-clock and is the one section
    that legitimately differs between otherwise identical runs.
    """

    config: dict
    groups: list[dict]
    totals: dict
    timings_ms: dict

    def payload(self) -> dict:
        return {
            "config": self.config,
            "groups": self.groups,
            "totals": self.totals,
            "timings_ms": self.timings_ms,
        }

    def comparable(self) -> dict:
        """Everything except wall-clock timings."""
        return {"config": self.config, "groups": self.groups, "totals": self.totals}


@dataclass
class CompressedVideo:
    """Full compression output: per-group tokens plus stream bookkeeping.

    ``markers`` lists the flat positions of the boundary markers in the
    emitted stream, where each group contributes its retained tokens
    followed by one marker.
    """

    frames: list[CompressedFrame]
    grouping: FrameGrouping
    plan: AllocationPlan
    markers: tuple[int, ...]
    report: CompressionReport

    @property
    def emitted(self) -> int:
        return sum(f.num_retained for f in self.frames) + len(self.markers)


def _worker_count(num_tasks: int) -> int:
    raw = os.environ.get("UNICOMP_THREADS", "").strip()
    cap = None
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            raise ConfigError(f"UNICOMP_THREADS must be an integer, got {raw!r}") from None
    workers = min(num_tasks, os.cpu_count() or 1, 8)
    if cap is not None:
        workers = min(workers, cap)
    return max(1, workers)


def _pmap(fn, items: list):
    workers = _worker_count(len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _identity_frame(tokens: np.ndarray) -> CompressedFrame:
    n = tokens.shape[0]
    return CompressedFrame(
        retained_ids=tuple(range(n)),
        retained_features=np.array(tokens, dtype=np.float64, copy=True),
        redundancy_map={i: () for i in range(n)},
        dropped_unclaimed=(),
    )


def _spread_surplus(spare: int, room: dict[int, int]) -> dict[int, int]:
    """Even-share rounds over groups with room, remainders to lowest indices."""
    adds = {k: 0 for k in room}
    while spare > 0:
        open_ks = [k for k in sorted(room) if adds[k] < room[k]]
        if not open_ks:
            break
        share = spare // len(open_ks)
        if share == 0:
            for k in open_ks[:spare]:
                adds[k] += 1
            spare = 0
        else:
            for k in open_ks:
                take = min(share, room[k] - adds[k])
                adds[k] += take
                spare -= take
    return adds


def _default_selector(config: CompressionConfig):
    def run(group_index, span, tokens, key, budget):
        return spatial_compress_parallel(
            tokens,
            key_frame=key,
            budget=budget,
            token_threshold=config.token_threshold,
            order=config.order,
            fuse=config.fuse,
        )

    return run


def _run(video: VideoTensor, config: CompressionConfig, selector=None) -> CompressedVideo:
    t_start = time.perf_counter()
    grouper = group_frames if config.grouping == "fusion" else group_frames_first_only
    grouping = grouper(video, config.frame_threshold)
    t_grouped = time.perf_counter()

    num_groups = grouping.num_groups
    tokens_per_frame = video.tokens_per_frame
    original_tokens = video.num_frames * tokens_per_frame
    select = selector if selector is not None else _default_selector(config)

    def key_for(k: int):
        return None if grouping.rep_keys is None else grouping.rep_keys[k]

    def run_group(item):
        k, budget = item
        return select(k, grouping.spans[k], grouping.rep_tokens[k], key_for(k), budget)

    surplus_returned = 0
    surplus_reused = 0
    bypass = False

    if config.mode == "auto":
        t_allocated = time.perf_counter()
        frames = _pmap(run_group, [(k, None) for k in range(num_groups)])
        retained = [f.num_retained for f in frames]
        emitted = sum(retained) + num_groups
        plan = AllocationPlan(
            budgets=tuple(retained),
            token_max=emitted,
            boundary_overhead=num_groups,
            waste_redistributed=0,
            raw_budgets=tuple(retained),
        )
        budgets = list(retained)
        token_max = None
    else:
        if config.token_max is not None:
            token_max = int(config.token_max)
        else:
            token_max = math.floor(config.retain_ratio * original_tokens)
        bypass = num_groups * (tokens_per_frame + 1) <= token_max
        if bypass:
            t_allocated = time.perf_counter()
            plan = AllocationPlan(
                budgets=(tokens_per_frame,) * num_groups,
                token_max=token_max,
                boundary_overhead=num_groups,
                waste_redistributed=0,
                raw_budgets=(tokens_per_frame,) * num_groups,
            )
            budgets = list(plan.budgets)
            frames = [_identity_frame(grouping.rep_tokens[k]) for k in range(num_groups)]
        else:
            if config.allocation == "softmax":
                scores = normalize_uniqueness(frame_uniqueness(grouping.rep_global))
                plan = allocate(scores, token_max, tokens_per_frame)
            else:
                plan = allocate_uniform(num_groups, token_max, tokens_per_frame)
            t_allocated = time.perf_counter()
            budgets = list(plan.budgets)
            frames = _pmap(run_group, [(k, budgets[k]) for k in range(num_groups)])

            # Groups can exhaust their tokens below budget; hand the unused
            # share to groups that still dropped tokens, then rerun just
            # those groups. Bounded rounds keep the worst case predictable.
            for _ in range(SURPLUS_ROUNDS):
                surplus = 0
                for k, frame in enumerate(frames):
                    unused = budgets[k] - frame.num_retained
                    if unused > 0:
                        budgets[k] = frame.num_retained
                        surplus += unused
                if surplus == 0:
                    break
                surplus_returned += surplus
                room = {
                    k: min(tokens_per_frame - budgets[k], len(frames[k].dropped_unclaimed))
                    for k in range(num_groups)
                    if frames[k].dropped_unclaimed and budgets[k] < tokens_per_frame
                }
                adds = _spread_surplus(surplus, room)
                receivers = [k for k, extra in sorted(adds.items()) if extra > 0]
                if not receivers:
                    break
                for k in receivers:
                    budgets[k] += adds[k]
                surplus_reused += sum(adds.values())
                reruns = _pmap(run_group, [(k, budgets[k]) for k in receivers])
                for k, frame in zip(receivers, reruns):
                    frames[k] = frame

    t_spatial = time.perf_counter()

    markers = []
    cursor = 0
    for frame in frames:
        cursor += frame.num_retained
        markers.append(cursor)
        cursor += 1
    emitted = cursor

    # internal invariant; allocation and redistribution keep this true by
    # construction, so a trip here means a defect rather than bad input
    if token_max is not None and emitted > token_max:
        raise RuntimeError(f"emitted stream of {emitted} tokens exceeds token_max={token_max}")

    group_rows = []
    for k, frame in enumerate(frames):
        start, end = grouping.spans[k]
        group_rows.append(
            {
                "range": [start, end],
                "budget": int(budgets[k]),
                "retained": frame.num_retained,
                "fused": frame.num_fused,
                "bound": uniqueness_bound(grouping.rep_tokens[k], frame.retained_ids),
                "error": reconstruction_error(
                    grouping.rep_tokens[k], frame.retained_ids, scheme="nearest"
                ),
            }
        )
    t_metrics = time.perf_counter()

    totals = {
        "groups": num_groups,
        "original_tokens": original_tokens,
        "retained": sum(f.num_retained for f in frames),
        "fused": sum(f.num_fused for f in frames),
        "dropped": sum(len(f.dropped_unclaimed) for f in frames),
        "markers": num_groups,
        "emitted": emitted,
        "retained_ratio": emitted / original_tokens,
        "token_max": token_max,
        "bypass": bypass,
        "surplus_returned": surplus_returned,
        "surplus_reused": surplus_reused,
        "waste_redistributed": plan.waste_redistributed,
    }
    report = CompressionReport(
        config=asdict(config),
        groups=group_rows,
        totals=totals,
        timings_ms={
            "grouping": (t_grouped - t_start) * 1e3,
            "allocation": (t_allocated - t_grouped) * 1e3,
            "spatial": (t_spatial - t_allocated) * 1e3,
            "metrics": (t_metrics - t_spatial) * 1e3,
            "total": (time.perf_counter() - t_start) * 1e3,
        },
    )
    return CompressedVideo(
        frames=frames,
        grouping=grouping,
        plan=plan,
        markers=tuple(markers),
        report=report,
    )


def compress(video: VideoTensor, config: CompressionConfig | None = None) -> CompressedVideo:
    """Compress a video under the given configuration.

    Deterministic for a fixed input and configuration regardless of worker
    count; ``UNICOMP_THREADS`` caps how many groups are processed at once.
    """
    return _run(video, config or CompressionConfig())


def analyze(
    video: VideoTensor, config: CompressionConfig | None = None, selector=None
) -> CompressionReport:
    """Run the compression computation and return only its report.

    ``selector`` optionally replaces the greedy spatial stage with a
    baseline callable of signature ``(group_index, span, tokens, key,
    budget) -> CompressedFrame``; budgets are required for baselines, so
    selectors are rejected in auto mode.
    """
    config = config or CompressionConfig()
    if selector is not None and config.mode == "auto":
        raise ConfigError("baseline selectors need budgets and cannot run in auto mode")
    return _run(video, config, selector=selector).report
