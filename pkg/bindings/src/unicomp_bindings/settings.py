"""Compression settings record and its mapping onto CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import BindingConfigError

__all__ = ["CompressionSettings"]


@dataclass(frozen=True)
class CompressionSettings:
    """Plain record of the knobs a compression run accepts.

    With neither ``retain_ratio`` nor ``token_max`` set the run is
    redundancy-driven (auto); setting one of them caps the emitted stream.
    Setting both is a conflict. The two thresholds default to the values
    the pipeline was tuned for.
    """

    frame_threshold: float = 0.005
    token_threshold: float = 0.2
    retain_ratio: float | None = None
    token_max: int | None = None
    order: str = "ids"
    fuse: bool = True
    grouping: str = "fusion"
    allocation: str = "softmax"

    def __post_init__(self):
        if self.retain_ratio is not None and self.token_max is not None:
            raise BindingConfigError("retain_ratio and token_max are mutually exclusive")

    @classmethod
    def from_mapping(cls, mapping) -> "CompressionSettings":
        if isinstance(mapping, cls):
            return mapping
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise BindingConfigError(f"unknown settings: {sorted(unknown)}")
        return cls(**mapping)

    @property
    def mode(self) -> str:
        budgeted = self.retain_ratio is not None or self.token_max is not None
        return "budgeted" if budgeted else "auto"

    def cli_flags(self) -> list[str]:
        flags = ["--uf", str(self.frame_threshold), "--uc", str(self.token_threshold)]
        if self.retain_ratio is not None:
            flags += ["--ratio", str(self.retain_ratio)]
        elif self.token_max is not None:
            flags += ["--token-max", str(self.token_max)]
        else:
            flags.append("--auto")
        flags += ["--order", self.order, "--fgf", self.grouping, "--alloc", self.allocation]
        if not self.fuse:
            flags.append("--no-fuse")
        return flags
