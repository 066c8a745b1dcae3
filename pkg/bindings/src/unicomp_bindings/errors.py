"""Exception types raised by the bindings layer."""

__all__ = [
    "BindingError",
    "BindingInputError",
    "BindingConfigError",
    "BindingRuntimeError",
    "WireFormatError",
]


class BindingError(Exception):
    """Base class for everything this package raises on purpose."""


class BindingInputError(BindingError, ValueError):
    """An input array or container that does not meet the contract."""


class BindingConfigError(BindingError, ValueError):
    """Conflicting or out-of-range compression settings."""


class BindingRuntimeError(BindingError, RuntimeError):
    """The compression tool failed for a reason other than bad input."""


class WireFormatError(BindingInputError):
    """Malformed container bytes."""
