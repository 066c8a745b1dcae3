"""Schema-stable JSON serialization for reports and sidecar metadata.

Keys are emitted sorted and floats are rounded to six significant digits,
so semantically identical runs serialize to identical text. Counts stay
integers and survive a round-trip exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .pipeline import CompressionReport

__all__ = ["report_to_json", "write_report", "to_jsonable"]


def _round_float(value: float) -> float:
    return float(f"{value:.6g}")


def to_jsonable(obj):
    """Recursively convert to JSON-friendly types with 6-significant-digit floats."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round_float(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def report_to_json(report: CompressionReport) -> str:
    return json.dumps(to_jsonable(report.payload()), sort_keys=True, indent=2) + "\n"


def write_report(report: CompressionReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_to_json(report))
