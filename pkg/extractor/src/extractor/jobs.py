"""Extraction job description and validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


class ExtractError(Exception):
    """Actionable extraction failure (bad model name, missing data, ...)."""


@dataclass(frozen=True)
class ExtractJob:
    """One export run: which model, which images, where the bundle goes.

    weights: a torchvision weight-enum member name (e.g. "IMAGENET1K_V1"
    or "DEFAULT"), or "none" for seeded random initialization when no
    checkpoint is available locally. split: optional subdirectory of
    data_dir (e.g. "val"); the images themselves must be arranged one
    class per subdirectory.
    """

    model: str
    data_dir: str
    out_dir: str
    batch_size: int = 32
    split: str | None = None
    weights: str = "DEFAULT"
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ExtractError(f"batch size must be >= 1, got {self.batch_size}")
        if not self.model:
            raise ExtractError("model name must be non-empty")

    @property
    def image_root(self) -> Path:
        root = Path(self.data_dir)
        return root / self.split if self.split else root
