"""Binary video-tensor container with bit-exact round-trips.

Layout, all little-endian:

    bytes 0..3    magic ``UCTK``
    bytes 4..5    version, u16, currently 1
    bytes 6..7    flags, u16; bit 0 set when a keys section follows
    bytes 8..23   T, N, d, d_k as u32
    frames        T*N*d float32, frame-major then row-major
    keys          T*N*d_k float32, present exactly when flag bit 0 is set

The byte length must match the header arithmetic exactly, so truncated and
trailing data are both rejected, as are non-finite payload values.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ContainerError
from .grouping import VideoTensor

__all__ = [
    "MAGIC",
    "VERSION",
    "FLAG_KEYS",
    "read_container",
    "write_container",
    "load_container",
    "save_container",
]

MAGIC = b"UCTK"
VERSION = 1
FLAG_KEYS = 0x0001

_HEADER = struct.Struct("<4sHHIIII")


def write_container(video: VideoTensor) -> bytes:
    """Serialize a video to container bytes; features are stored as float32."""
    frames = np.ascontiguousarray(video.frames, dtype="<f4")
    t, n, d = frames.shape
    flags = 0
    dk = 0
    key_bytes = b""
    if video.keys is not None:
        keys = np.ascontiguousarray(video.keys, dtype="<f4")
        flags |= FLAG_KEYS
        dk = keys.shape[2]
        key_bytes = keys.tobytes()
    header = _HEADER.pack(MAGIC, VERSION, flags, t, n, d, dk)
    return header + frames.tobytes() + key_bytes


def _read_payload(data: bytes, offset: int, count: int, shape, section: str) -> np.ndarray:
    flat = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
    finite = np.isfinite(flat)
    if not finite.all():
        first = int(np.flatnonzero(~finite)[0])
        raise ContainerError(
            f"non-finite value in {section} payload at byte offset {offset + 4 * first}"
        )
    return np.array(flat, dtype=np.float32).reshape(shape)


def read_container(data: bytes) -> VideoTensor:
    """Parse container bytes into a :class:`VideoTensor` of exact float32 values.

    Raises:
        ContainerError: on a bad magic, an unsupported version, unknown
            flags, inconsistent dimensions, a payload length that does not
            match the header, or non-finite payload values.
    """
    if len(data) < _HEADER.size:
        raise ContainerError(
            f"truncated header: expected at least {_HEADER.size} bytes, got {len(data)}"
        )
    magic, version, flags, t, n, d, dk = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}, expected {VERSION}")
    if flags & ~FLAG_KEYS:
        raise ContainerError(f"unknown flag bits 0x{flags & ~FLAG_KEYS:04x}")
    has_keys = bool(flags & FLAG_KEYS)
    if has_keys and dk == 0:
        raise ContainerError("keys flag is set but the keys dimension is zero")
    if not has_keys and dk != 0:
        raise ContainerError(f"keys dimension {dk} given without the keys flag")
    if t < 1 or n < 1 or d < 1:
        raise ContainerError(f"dimensions must be positive, got T={t} N={n} d={d}")

    frame_count = t * n * d
    key_count = t * n * dk if has_keys else 0
    expected = _HEADER.size + 4 * (frame_count + key_count)
    if len(data) != expected:
        raise ContainerError(
            f"payload length mismatch: expected {expected} bytes, got {len(data)}"
        )

    frames = _read_payload(data, _HEADER.size, frame_count, (t, n, d), "frames")
    keys = None
    if has_keys:
        keys = _read_payload(
            data, _HEADER.size + 4 * frame_count, key_count, (t, n, dk), "keys"
        )
    return VideoTensor(frames=frames, keys=keys)


def save_container(path, video: VideoTensor) -> None:
    with open(path, "wb") as fh:
        fh.write(write_container(video))


def load_container(path) -> VideoTensor:
    with open(path, "rb") as fh:
        return read_container(fh.read())
