"""Standalone codec for the UCTK token-container wire format.

The layout is fixed and little-endian: a 4-byte ``UCTK`` magic, version and
flags as u16, the four dimensions T, N, d, d_k as u32, then the frame
payload as T*N*d float32 values in frame-major row order. When flag bit 0
is set, a T*N*d_k float32 keys payload follows. Byte length must match the
header arithmetic exactly.

This module is deliberately self-contained so the package speaks to the
compression tool purely over bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import WireFormatError

__all__ = ["pack_video", "unpack_video"]

_MAGIC = b"UCTK"
_VERSION = 1
_KEYS_BIT = 0x0001
_HEADER = struct.Struct("<4sHHIIII")


def pack_video(frames: np.ndarray, keys: np.ndarray | None = None) -> bytes:
    """Encode float32 (T, N, d) frames, and optionally (T, N, d_k) keys."""
    frames = np.ascontiguousarray(frames, dtype="<f4")
    if frames.ndim != 3:
        raise WireFormatError(f"frames must have shape (T, N, d), got {frames.shape}")
    t, n, d = frames.shape
    flags = 0
    dk = 0
    tail = b""
    if keys is not None:
        keys = np.ascontiguousarray(keys, dtype="<f4")
        if keys.ndim != 3 or keys.shape[:2] != (t, n):
            raise WireFormatError(
                f"keys must have shape ({t}, {n}, d_k), got {keys.shape}"
            )
        flags |= _KEYS_BIT
        dk = keys.shape[2]
        tail = keys.tobytes()
    return _HEADER.pack(_MAGIC, _VERSION, flags, t, n, d, dk) + frames.tobytes() + tail


def unpack_video(data: bytes) -> tuple[np.ndarray, np.ndarray | None]:
    """Decode container bytes into (frames, keys-or-None) float32 arrays."""
    if len(data) < _HEADER.size:
        raise WireFormatError(f"container shorter than its {_HEADER.size}-byte header")
    magic, version, flags, t, n, d, dk = _HEADER.unpack_from(data, 0)
    if magic != _MAGIC:
        raise WireFormatError(f"not a UCTK container (magic {magic!r})")
    if version != _VERSION:
        raise WireFormatError(f"container version {version} is not supported")
    if flags & ~_KEYS_BIT:
        raise WireFormatError(f"container uses unknown flag bits 0x{flags & ~_KEYS_BIT:04x}")
    has_keys = bool(flags & _KEYS_BIT)
    if has_keys == (dk == 0):
        raise WireFormatError("keys flag and keys dimension disagree")
    if min(t, n, d) < 1:
        raise WireFormatError(f"container dimensions must be positive, got T={t} N={n} d={d}")

    frame_count = t * n * d
    key_count = t * n * dk
    expected = _HEADER.size + 4 * (frame_count + key_count)
    if len(data) != expected:
        raise WireFormatError(f"container should be {expected} bytes, found {len(data)}")

    frames = np.frombuffer(data, dtype="<f4", count=frame_count, offset=_HEADER.size)
    frames = frames.reshape(t, n, d).copy()
    keys = None
    if has_keys:
        keys = np.frombuffer(
            data, dtype="<f4", count=key_count, offset=_HEADER.size + 4 * frame_count
        )
        keys = keys.reshape(t, n, dk).copy()
    return frames, keys
