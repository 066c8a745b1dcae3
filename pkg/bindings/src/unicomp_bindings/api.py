"""compress/analyze over in-memory arrays, backed by the unicomp CLI.

The functions here accept C-contiguous float32 arrays, ship them to the
``unicomp`` command as a UCTK container in a scratch directory, and map the
results back to plain records. Nothing from the compression package itself
is imported: the boundary is the container bytes, the CLI flags, and the
JSON documents it writes. Calls block in the subprocess wait, so the
interpreter lock is free during the heavy work and concurrent calls on
distinct inputs are safe.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .container import pack_video, unpack_video
from .errors import BindingConfigError, BindingInputError, BindingRuntimeError
from .settings import CompressionSettings

__all__ = ["CompressResult", "compress", "analyze"]


@dataclass(frozen=True)
class CompressResult:
    """Owned copies of one compression run's outputs.

    ``features`` stacks every retained token row in emission order across
    groups; ``group_ids`` and ``group_spans`` describe, per group, which
    token ids survived and which frame range the group covers. ``markers``
    holds the flat positions of the boundary markers in the emitted stream.
    """

    features: np.ndarray
    group_ids: tuple[tuple[int, ...], ...]
    group_spans: tuple[tuple[int, int], ...]
    markers: tuple[int, ...]
    report: dict

    @property
    def num_groups(self) -> int:
        return len(self.group_spans)

    @property
    def emitted(self) -> int:
        return self.features.shape[0] + len(self.markers)

    def group_features(self, index: int) -> np.ndarray:
        offset = sum(len(ids) for ids in self.group_ids[:index])
        return self.features[offset : offset + len(self.group_ids[index])]


def _cli_command() -> list[str]:
    override = os.environ.get("UNICOMP_CLI", "").strip()
    if override:
        return shlex.split(override)
    found = shutil.which("unicomp")
    if found:
        return [found]
    return [sys.executable, "-m", "unicomp"]


def _run_cli(args: list[str]) -> None:
    command = _cli_command() + args
    proc = subprocess.run(command, capture_output=True, text=True)
    if proc.returncode == 0:
        return
    detail = proc.stderr.strip() or proc.stdout.strip() or f"exit code {proc.returncode}"
    if proc.returncode == 2:
        raise BindingConfigError(detail)
    if proc.returncode == 3:
        raise BindingInputError(detail)
    raise BindingRuntimeError(detail)


def _checked_array(value, t: int | None, n: int | None, what: str) -> np.ndarray:
    arr = np.asarray(value)
    shape = "(T, N, d_k)" if what == "keys" else "(T, N, d)"
    if arr.ndim != 3 or arr.dtype != np.float32 or not arr.flags["C_CONTIGUOUS"]:
        raise BindingInputError(
            f"{what} must be a C-contiguous float32 array of shape {shape}, "
            f"got dtype={arr.dtype}, shape={arr.shape}"
        )
    if t is not None and arr.shape[:2] != (t, n):
        raise BindingInputError(
            f"keys must cover the same (T, N) = ({t}, {n}) as features, got {arr.shape[:2]}"
        )
    return arr


def _resolve(settings) -> CompressionSettings:
    if settings is None:
        return CompressionSettings()
    return CompressionSettings.from_mapping(settings)


def compress(features, *, keys=None, settings=None) -> CompressResult:
    """Compress in-memory token features and return owned result arrays.

    ``features`` is a C-contiguous float32 array of shape (T, N, d);
    ``keys``, when given, is a parallel (T, N, d_k) array used for
    redundancy scoring. ``settings`` is a :class:`CompressionSettings` or a
    plain mapping with the same field names. The input arrays are only
    read, never modified or retained.
    """
    resolved = _resolve(settings)
    arr = _checked_array(features, None, None, "features")
    key_arr = _checked_array(keys, arr.shape[0], arr.shape[1], "keys") if keys is not None else None

    with tempfile.TemporaryDirectory(prefix="unicomp-bindings-") as scratch:
        root = Path(scratch)
        input_path = root / "input.uctk"
        output_path = root / "output.uctk"
        sidecar_path = root / "output.meta.json"
        report_path = root / "report.json"
        input_path.write_bytes(pack_video(arr, key_arr))

        _run_cli(
            [
                "compress",
                "--input", str(input_path),
                "--output", str(output_path),
                "--sidecar", str(sidecar_path),
                "--report", str(report_path),
                *resolved.cli_flags(),
            ]
        )

        rows, _ = unpack_video(output_path.read_bytes())
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        report = json.loads(report_path.read_text(encoding="utf-8"))

    return CompressResult(
        features=rows[0],
        group_ids=tuple(tuple(g["retained_ids"]) for g in sidecar["groups"]),
        group_spans=tuple(tuple(g["span"]) for g in sidecar["groups"]),
        markers=tuple(sidecar["markers"]),
        report=report,
    )


def analyze(features, *, keys=None, settings=None) -> dict:
    """Run the same computation as :func:`compress` but return only the report."""
    resolved = _resolve(settings)
    arr = _checked_array(features, None, None, "features")
    key_arr = _checked_array(keys, arr.shape[0], arr.shape[1], "keys") if keys is not None else None

    with tempfile.TemporaryDirectory(prefix="unicomp-bindings-") as scratch:
        root = Path(scratch)
        input_path = root / "input.uctk"
        report_path = root / "report.json"
        input_path.write_bytes(pack_video(arr, key_arr))
        _run_cli(
            [
                "analyze",
                "--input", str(input_path),
                "--report", str(report_path),
                *resolved.cli_flags(),
            ]
        )
        return json.loads(report_path.read_text(encoding="utf-8"))
