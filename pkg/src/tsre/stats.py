"""Per-channel statistics fitted from ID training features.

Covers channel moments, class prototypes, inter-class similarity and
variance, discriminability, percentile-gated activity, and channel
skewness, plus the one-pass fit that bundles them into a ChannelProfile.
All standard deviations use the population convention (divide by N).
"""

from __future__ import annotations

import numpy as np

from .core import (
    BalanceOutOfRange,
    ChannelProfile,
    DimensionMismatch,
    EmptyClass,
    FeatureMatrix,
    HyperParams,
    LabelVector,
    PercentileOutOfRange,
    Prototypes,
    TooFewClasses,
    validate_bundle,
)

ABS_DIFF_EPS = 1e-12


def nearest_rank(values: np.ndarray, p: float) -> float:
    """k-th smallest value with k = ceil(p*n/100); the library's only quantile rule."""
    if not 0.0 < p <= 100.0:
        raise PercentileOutOfRange(f"percentile must lie in (0, 100], got {p}")
    v = np.sort(np.asarray(values, dtype=np.float64), kind="stable")
    n = v.shape[0]
    k = int(np.ceil(p * n / 100.0))
    k = min(max(k, 1), n)
    return float(v[k - 1])


def channel_moments(features: FeatureMatrix):
    """Column means and population stds, plus their global means.

    Returns (mu, sigma, mu_bar, sigma_bar).
    """
    z = features.data
    mu = z.mean(axis=0)
    sigma = z.std(axis=0)  # ddof=0, population convention
    return mu, sigma, float(mu.mean()), float(sigma.mean())


def compute_prototypes(features: FeatureMatrix, labels: LabelVector,
                       n_classes: int) -> Prototypes:
    """Arithmetic mean of the feature rows of each class."""
    if n_classes < 1:
        raise TooFewClasses("need at least one class")
    validate_bundle(features, labels, n_classes=n_classes)
    z = features.data
    y = labels.labels
    protos = np.empty((n_classes, features.n_channels), dtype=np.float64)
    counts = np.empty(n_classes, dtype=np.int64)
    for c in range(n_classes):
        rows = z[y == c]
        if rows.shape[0] == 0:
            raise EmptyClass(f"class {c} has no samples")
        protos[c] = rows.mean(axis=0)
        counts[c] = rows.shape[0]
    return Prototypes(matrix=protos, class_counts=counts)


def _scalar_cosine_sign(prototypes: Prototypes) -> np.ndarray:
    # For scalar arguments cosine similarity degenerates to sign(a)*sign(b),
    # with the convention delta(0, .) = 0. Ordered-pair sums reduce to
    # counting sign agreements per channel.
    h = prototypes.matrix
    c = prototypes.n_classes
    pos = (h > 0).sum(axis=0).astype(np.float64)
    neg = (h < 0).sum(axis=0).astype(np.float64)
    pair_sum = pos * (pos - 1) + neg * (neg - 1) - 2.0 * pos * neg
    return pair_sum / (c * (c - 1))


def _scalar_abs_diff(prototypes: Prototypes) -> np.ndarray:
    # delta(a, b) = 1 - |a - b| / (|a| + |b| + eps), summed over ordered pairs.
    h = prototypes.matrix
    c = prototypes.n_classes
    total = np.zeros(prototypes.n_channels, dtype=np.float64)
    for i in range(c):
        for j in range(c):
            if i == j:
                continue
            a, b = h[i], h[j]
            total += 1.0 - np.abs(a - b) / (np.abs(a) + np.abs(b) + ABS_DIFF_EPS)
    return total / (c * (c - 1))


def inter_class_similarity(prototypes: Prototypes, mode: str = "sign") -> np.ndarray:
    """Mean pairwise similarity of per-channel prototype entries over ordered class pairs."""
    if prototypes.n_classes < 2:
        raise TooFewClasses(
            f"similarity needs at least 2 classes, got {prototypes.n_classes}")
    if mode == "sign":
        return _scalar_cosine_sign(prototypes)
    if mode == "abs-diff":
        return _scalar_abs_diff(prototypes)
    raise ValueError(f"unknown similarity mode {mode!r}")


def inter_class_variance(prototypes: Prototypes) -> np.ndarray:
    """Population variance of each channel's entries across class prototypes."""
    return prototypes.matrix.var(axis=0)


def discriminability(similarity: np.ndarray, variance: np.ndarray, a: float) -> np.ndarray:
    """a * similarity - (1 - a) * variance; lower means more discriminative."""
    if not 0.0 <= a <= 1.0:
        raise BalanceOutOfRange(f"balance a must lie in [0, 1], got {a}")
    similarity = np.asarray(similarity, dtype=np.float64)
    variance = np.asarray(variance, dtype=np.float64)
    if similarity.shape != variance.shape:
        raise DimensionMismatch("similarity and variance lengths differ")
    return a * similarity - (1.0 - a) * variance


def activity(prototypes: Prototypes, p: float) -> np.ndarray:
    """Mean absolute prototype activation per channel, zeroed below the p-th percentile."""
    raw = np.abs(prototypes.matrix).mean(axis=0)
    tau = nearest_rank(raw, p)
    return np.where(raw >= tau, raw, 0.0)


def standardized_skewness(rows: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Third standardized moment of each column, 0 wherever sigma is 0."""
    rows = np.asarray(rows, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if rows.ndim != 2 or mu.shape != (rows.shape[1],) or sigma.shape != (rows.shape[1],):
        raise DimensionMismatch("rows must be 2-D with matching mu/sigma lengths")
    safe = np.where(sigma > 0, sigma, 1.0)
    z = (rows - mu) / safe
    skew = (z ** 3).mean(axis=0)
    return np.where(sigma > 0, skew, 0.0)


def channel_skewness(prototypes: Prototypes, mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Skewness of each channel across class prototypes, standardized by (mu, sigma)."""
    return standardized_skewness(prototypes.matrix, mu, sigma)


def fit_profile(features: FeatureMatrix, labels: LabelVector, params: HyperParams,
                n_classes: int | None = None) -> tuple[ChannelProfile, Prototypes]:
    """One pass producing the full ChannelProfile plus the class prototypes.

    n_classes defaults to max(label) + 1. Factors disabled through the
    HyperParams flags come back as zero vectors. Results are bitwise
    identical to composing the constituent operations by hand.
    """
    if n_classes is None:
        n_classes = int(labels.labels.max()) + 1 if len(labels) else 0
    if n_classes < 2:
        raise TooFewClasses(f"profile fitting needs at least 2 classes, got {n_classes}")
    validate_bundle(features, labels, n_classes=n_classes)

    mu, sigma, mu_bar, sigma_bar = channel_moments(features)
    protos = compute_prototypes(features, labels, n_classes)
    m = features.n_channels

    similarity = inter_class_similarity(protos, mode=params.similarity_mode)
    variance = inter_class_variance(protos)
    if params.enable_discriminability:
        disc = discriminability(similarity, variance, params.a_balance)
    else:
        disc = np.zeros(m)

    if params.enable_activity:
        act = activity(protos, params.percentile_p)
    else:
        act = np.zeros(m)

    if params.enable_skew:
        if params.skew_source == "prototypes":
            proto_mu = protos.matrix.mean(axis=0)
            proto_sigma = protos.matrix.std(axis=0)
            skew = channel_skewness(protos, proto_mu, proto_sigma)
        else:  # train-features
            skew = standardized_skewness(features.data, mu, sigma)
    else:
        skew = np.zeros(m)

    profile = ChannelProfile(
        mu=mu, sigma=sigma, mu_bar=mu_bar, sigma_bar=sigma_bar,
        similarity=similarity, variance=variance, discriminability=disc,
        activity=act, skew=skew,
    )
    return profile, protos
