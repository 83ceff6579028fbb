"""Seeded synthetic benchmark with skewed, heterogeneous channel noise.

Per-channel noise is centered, unit-variance gamma: noise =
(Gamma(shape_k, 1) - shape_k) / sqrt(shape_k), whose skewness is
2/sqrt(shape_k) in closed form, so the skewness estimator can be checked
against an analytic oracle. Randomness comes from numpy's Philox
counter-based generator; each purpose (shapes, class means, the three
noise blocks) draws from its own spawned child stream, making every
artifact reproducible from the seed alone, in any draw order.

This is a controlled testbed, not a simulator of CNN feature statistics.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .core import ClassifierHead, FeatureMatrix, InvalidConfig, IoFailure, LabelVector, ParseFailure

# spawn indices of the per-purpose child streams
_STREAM_SHAPES = 0
_STREAM_ID_MEANS = 1
_STREAM_TRAIN_NOISE = 2
_STREAM_TEST_NOISE = 3
_STREAM_OOD_MEANS = 4
_STREAM_OOD_NOISE = 5
_N_STREAMS = 6


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_classes: int = 20
    n_channels: int = 64
    n_id_train: int = 5000
    n_id_test: int = 2000
    n_ood: int = 2000
    skew_shape: tuple[float, float] = (0.5, 4.0)
    class_separation: float = 0.3
    ood_shift: float = 0.5
    noise_scale: float = 1.0

    def __post_init__(self):
        for name in ("n_classes", "n_channels", "n_id_train", "n_id_test", "n_ood"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {getattr(self, name)}")
        lo, hi = self.skew_shape
        if not (lo > 0 and hi > 0):
            raise InvalidConfig(f"gamma shapes must be > 0, got {self.skew_shape}")
        if lo > hi:
            raise InvalidConfig(f"skew_shape low {lo} exceeds high {hi}")
        if self.noise_scale < 0:
            raise InvalidConfig(f"noise_scale must be >= 0, got {self.noise_scale}")
        object.__setattr__(self, "skew_shape", (float(lo), float(hi)))


@dataclass(frozen=True)
class ReferenceStats:
    """Closed-form generator moments for oracle tests."""

    shapes: np.ndarray          # per-channel gamma shape
    id_class_means: np.ndarray  # C x M
    ood_class_means: np.ndarray
    noise_mean: float
    noise_std: float
    noise_skew: np.ndarray      # 2 / sqrt(shape), per channel


def _streams(config: SynthConfig) -> list[np.random.Generator]:
    children = np.random.SeedSequence(config.seed).spawn(_N_STREAMS)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def _draw_shapes(rng: np.random.Generator, config: SynthConfig) -> np.ndarray:
    lo, hi = config.skew_shape
    return rng.uniform(lo, hi, size=config.n_channels)


def _draw_means(rng: np.random.Generator, config: SynthConfig, shift: float) -> np.ndarray:
    base = rng.standard_normal((config.n_classes, config.n_channels))
    return config.class_separation * base + shift


def _noise_block(rng: np.random.Generator, shapes: np.ndarray, n: int,
                 noise_scale: float) -> np.ndarray:
    g = rng.standard_gamma(np.broadcast_to(shapes, (n, shapes.shape[0])))
    return noise_scale * (g - shapes) / np.sqrt(shapes)


def _round_robin_labels(n: int, c: int) -> LabelVector:
    return LabelVector(np.arange(n, dtype=np.int64) % c)


def reference_stats(config: SynthConfig) -> ReferenceStats:
    """Population moments of the generator, derived from the seed alone."""
    streams = _streams(config)
    shapes = _draw_shapes(streams[_STREAM_SHAPES], config)
    id_means = _draw_means(streams[_STREAM_ID_MEANS], config, 0.0)
    ood_means = _draw_means(streams[_STREAM_OOD_MEANS], config, config.ood_shift)
    return ReferenceStats(
        shapes=shapes,
        id_class_means=id_means,
        ood_class_means=ood_means,
        noise_mean=0.0,
        noise_std=config.noise_scale,
        noise_skew=2.0 / np.sqrt(shapes),
    )


def generate(config: SynthConfig):
    """Deterministic (train, id_test, ood, head) from the seeded generator.

    Each part is a (FeatureMatrix, LabelVector) pair; labels are assigned
    round-robin so every class is populated. The head is a one-vs-rest
    prototype classifier: row c = generated class-c mean, zero bias.
    """
    streams = _streams(config)
    shapes = _draw_shapes(streams[_STREAM_SHAPES], config)
    id_means = _draw_means(streams[_STREAM_ID_MEANS], config, 0.0)
    ood_means = _draw_means(streams[_STREAM_OOD_MEANS], config, config.ood_shift)

    def _block(rng, means, n):
        labels = _round_robin_labels(n, config.n_classes)
        noise = _noise_block(rng, shapes, n, config.noise_scale)
        return FeatureMatrix(means[labels.labels] + noise), labels

    train = _block(streams[_STREAM_TRAIN_NOISE], id_means, config.n_id_train)
    id_test = _block(streams[_STREAM_TEST_NOISE], id_means, config.n_id_test)
    ood = _block(streams[_STREAM_OOD_NOISE], ood_means, config.n_ood)
    head = ClassifierHead(weights=id_means, bias=np.zeros(config.n_classes))
    return train, id_test, ood, head


# ---------------------------------------------------------------------------
# Provenance record
# ---------------------------------------------------------------------------

CONFIG_FILE = "synth_config.txt"

_INT_FIELDS = ("seed", "n_classes", "n_channels", "n_id_train", "n_id_test", "n_ood")
_FLOAT_FIELDS = ("class_separation", "ood_shift", "noise_scale")


def write_config(dir_path: str | os.PathLike, config: SynthConfig) -> None:
    d = Path(dir_path)
    vals = asdict(config)
    lines = [f"{k} = {vals[k]}" for k in _INT_FIELDS]
    lines.append(f"skew_shape_low = {vals['skew_shape'][0]!r}")
    lines.append(f"skew_shape_high = {vals['skew_shape'][1]!r}")
    lines += [f"{k} = {vals[k]!r}" for k in _FLOAT_FIELDS]
    try:
        (d / CONFIG_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {d / CONFIG_FILE}: {e}") from e


def read_config(dir_path: str | os.PathLike) -> SynthConfig:
    path = Path(dir_path) / CONFIG_FILE
    if not path.is_file():
        raise IoFailure(f"missing config record {path}")
    kv = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseFailure(f"{path}:{lineno}: expected 'key = value'")
        k, _, v = line.partition("=")
        kv[k.strip()] = v.strip()
    try:
        return SynthConfig(
            **{k: int(kv[k]) for k in _INT_FIELDS},
            skew_shape=(float(kv["skew_shape_low"]), float(kv["skew_shape_high"])),
            **{k: float(kv[k]) for k in _FLOAT_FIELDS},
        )
    except (KeyError, ValueError) as e:
        raise ParseFailure(f"{path}: bad or missing field: {e}") from None
