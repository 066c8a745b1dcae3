"""Uniqueness-driven video token compression.

A video arrives as a stack of per-frame token-feature matrices. Compression
runs in three stages: temporally similar frames are merged into groups,
each group receives a token budget proportional to how distinctive it is,
and within each group the most distinctive tokens are retained greedily
while near-duplicate neighbors are fused into them. Reconstruction-error
bounds make the loss measurable, and a binary container plus JSON report
make runs portable and comparable.
"""

from .allocation import AllocationPlan, allocate, allocate_uniform, frame_uniqueness, normalize_uniqueness
from .baselines import random_selection
from .errors import (
    BudgetError,
    ConfigError,
    ContainerError,
    DegenerateFeatureError,
    SelectionError,
    UnicompError,
)
from .grouping import (
    FrameGrouping,
    VideoTensor,
    global_frame_feature,
    group_frames,
    group_frames_first_only,
)
from .kernels import (
    pairwise_uniqueness,
    reconstruction,
    reconstruction_error,
    softmax_residual_bound,
    token_uniqueness,
    uniqueness_bound,
    uniqueness_matrix,
)
from .pipeline import CompressedVideo, CompressionConfig, CompressionReport, analyze, compress
from .reporting import report_to_json, write_report
from .spatial import (
    CompressedFrame,
    attention_topk,
    benchmark,
    frames_match,
    selection_order,
    spatial_compress_parallel,
    spatial_compress_reference,
    uniqueness_topk,
)
from .uctk import load_container, read_container, save_container, write_container
from .verify import BoundCheckResult, run_bound_checks

__version__ = "0.1.0"

__all__ = [
    "AllocationPlan",
    "BoundCheckResult",
    "BudgetError",
    "CompressedFrame",
    "CompressedVideo",
    "CompressionConfig",
    "CompressionReport",
    "ConfigError",
    "ContainerError",
    "DegenerateFeatureError",
    "FrameGrouping",
    "SelectionError",
    "UnicompError",
    "VideoTensor",
    "allocate",
    "allocate_uniform",
    "analyze",
    "attention_topk",
    "benchmark",
    "compress",
    "frame_uniqueness",
    "frames_match",
    "global_frame_feature",
    "group_frames",
    "group_frames_first_only",
    "load_container",
    "normalize_uniqueness",
    "pairwise_uniqueness",
    "random_selection",
    "read_container",
    "reconstruction",
    "reconstruction_error",
    "report_to_json",
    "run_bound_checks",
    "save_container",
    "selection_order",
    "softmax_residual_bound",
    "spatial_compress_parallel",
    "spatial_compress_reference",
    "token_uniqueness",
    "uniqueness_bound",
    "uniqueness_matrix",
    "uniqueness_topk",
    "write_container",
    "write_report",
]
