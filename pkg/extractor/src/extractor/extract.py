"""Deterministic batched feature extraction into a bundle directory."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .jobs import ExtractError, ExtractJob
from .models import (
    classifier_head,
    eval_transform,
    hook_point,
    load_model,
    penultimate_features,
)
from .writer import write_bundle_files


def _load_dataset(job: ExtractJob, transform):
    from torchvision.datasets import ImageFolder

    root = job.image_root
    if not root.is_dir():
        raise ExtractError(
            f"image directory {root} does not exist; expected one subdirectory "
            f"per class containing images")
    try:
        dataset = ImageFolder(str(root), transform=transform)
    except FileNotFoundError as e:
        raise ExtractError(
            f"{root} holds no class subdirectories with images: {e}") from e
    if len(dataset) == 0:
        raise ExtractError(f"{root} contains no images")
    return dataset


def extract(job: ExtractJob) -> dict:
    """Run the export; returns a small report with shapes and deviation.

    Deterministic: fixed image order (ImageFolder sorts paths), eval mode,
    no augmentation, no grad, single-process data loading.
    """
    model = load_model(job.model, job.weights, job.seed)
    transform = eval_transform(job.model, job.weights)
    dataset = _load_dataset(job, transform)
    head = classifier_head(model, job.model)
    n_classes = head.out_features
    n_channels = head.in_features

    max_label = max(label for _, label in dataset.samples)
    if max_label >= n_classes:
        raise ExtractError(
            f"{max_label + 1} class folders but the model head has only "
            f"{n_classes} outputs")

    feature_blocks = []
    logit_blocks = []
    labels = []
    with torch.no_grad():
        for start in range(0, len(dataset), job.batch_size):
            items = [dataset[i] for i in range(start, min(start + job.batch_size,
                                                          len(dataset)))]
            batch = torch.stack([img for img, _ in items])
            labels.extend(label for _, label in items)
            feats = penultimate_features(model, job.model, batch)
            feature_blocks.append(feats.numpy().astype(np.float32))
            logit_blocks.append(model(batch).numpy().astype(np.float32))

    features = np.concatenate(feature_blocks, axis=0)
    model_logits = np.concatenate(logit_blocks, axis=0)
    if features.shape[1] != n_channels:
        raise ExtractError(
            f"hook produced {features.shape[1]} channels, head expects {n_channels}")

    weights = head.weight.detach().numpy().astype(np.float32)
    bias = head.bias.detach().numpy().astype(np.float32) if head.bias is not None \
        else np.zeros(n_classes, dtype=np.float32)
    out = write_bundle_files(job.out_dir, features, np.asarray(labels),
                             weights, bias, n_classes)

    deviation = verify_logits(out, model_logits)
    return {
        "out_dir": str(out),
        "n_samples": int(features.shape[0]),
        "n_channels": int(n_channels),
        "n_classes": int(n_classes),
        "hook_point": hook_point(job.model),
        "max_logit_deviation": deviation,
    }


def verify_logits(bundle_dir: str | Path, model_logits: np.ndarray | None = None,
                  logits_file: str | Path | None = None) -> float:
    """Recompute logits from the exported features + head; max |delta|.

    Compares against logits captured during extraction (or a saved .npy).
    Deviations beyond float32 accumulation noise indicate a broken export,
    e.g. a head written without its bias.
    """
    bundle = Path(bundle_dir)
    kv = dict(line.split(" = ", 1) for line in
              (bundle / "manifest.txt").read_text().splitlines() if line)
    n = int(kv["n_samples"])
    m = int(kv["n_channels"])
    c = int(kv["n_classes"])
    features = np.fromfile(bundle / kv["features"], dtype="<f4").reshape(n, m)
    weights = np.fromfile(bundle / kv["head_weights"], dtype="<f4").reshape(c, m)
    bias = np.fromfile(bundle / kv["head_bias"], dtype="<f4")

    recomputed = features.astype(np.float64) @ weights.astype(np.float64).T \
        + bias.astype(np.float64)
    if model_logits is None:
        if logits_file is None:
            raise ExtractError("verify_logits needs captured model logits")
        model_logits = np.load(logits_file)
    return float(np.max(np.abs(recomputed - model_logits.astype(np.float64))))
