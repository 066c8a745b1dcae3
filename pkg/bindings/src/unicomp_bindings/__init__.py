"""Array-in, array-out frontend for the unicomp compression tool."""

from .api import CompressResult, analyze, compress
from .container import pack_video, unpack_video
from .errors import (
    BindingConfigError,
    BindingError,
    BindingInputError,
    BindingRuntimeError,
    WireFormatError,
)
from .settings import CompressionSettings

__all__ = [
    "BindingConfigError",
    "BindingError",
    "BindingInputError",
    "BindingRuntimeError",
    "CompressResult",
    "CompressionSettings",
    "WireFormatError",
    "analyze",
    "compress",
    "pack_video",
    "unpack_video",
]

__version__ = "0.1.0"
