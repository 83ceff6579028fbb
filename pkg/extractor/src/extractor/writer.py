"""Bundle writer implementing the tsre interchange file contract.

Layout: `manifest.txt` with sorted `key = value` lines, plus raw
little-endian tensors: features.f32 (float32, row-major), labels.i32
(int32), head_weights.f32 (C x M, row-major), head_bias.f32. Kept
independent of the tsre package on purpose: the files are the interface.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def write_bundle_files(out_dir: str | Path, features: np.ndarray,
                       labels: np.ndarray, head_weights: np.ndarray,
                       head_bias: np.ndarray, n_classes: int) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n, m = features.shape
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match {n} samples")
    if head_weights.shape != (n_classes, m) or head_bias.shape != (n_classes,):
        raise ValueError("head shapes do not match n_classes x n_channels")

    np.ascontiguousarray(features, dtype="<f4").tofile(out / "features.f32")
    np.ascontiguousarray(labels, dtype="<i4").tofile(out / "labels.i32")
    np.ascontiguousarray(head_weights, dtype="<f4").tofile(out / "head_weights.f32")
    np.ascontiguousarray(head_bias, dtype="<f4").tofile(out / "head_bias.f32")

    entries = {
        "format_version": str(FORMAT_VERSION),
        "n_samples": str(n),
        "n_channels": str(m),
        "n_classes": str(n_classes),
        "features": "features.f32",
        "labels": "labels.i32",
        "head_weights": "head_weights.f32",
        "head_bias": "head_bias.f32",
        "dtype_features": "f32le",
        "dtype_labels": "i32le",
    }
    lines = [f"{k} = {entries[k]}" for k in sorted(entries)]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out
