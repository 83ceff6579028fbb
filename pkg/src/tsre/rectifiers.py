"""Activation rectifiers: ReAct, BATS, LAPS, and typical-set refinement.

Each scheme is a fit/apply pair over feature matrices. Apply operations
never modify their input; they return new matrices, so score functions
can be compared on identical features. Scaling factors are clamped at 0
before bounds are formed, which keeps lower <= upper everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ChannelProfile,
    DimensionMismatch,
    FeatureMatrix,
    HyperParams,
    NegativeLambda,
    NonFiniteValue,
    PercentileOutOfRange,
    TypicalSet,
)
from .stats import nearest_rank


@dataclass(frozen=True)
class ReactThreshold:
    """Global clip level fitted from the ID activation distribution."""

    c: float

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise NonFiniteValue(f"clip level must be finite, got {self.c}")
        object.__setattr__(self, "c", float(self.c))


@dataclass(frozen=True)
class LapsBounds:
    """Per-channel clip interval from global-local statistic deviations."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise DimensionMismatch("lower/upper must be 1-D vectors of equal length")
        if np.any(lo > hi):
            k = int(np.argmax(lo > hi))
            raise DimensionMismatch(f"lower[{k}] exceeds upper[{k}]")
        lo = lo.copy()
        hi = hi.copy()
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n_channels(self) -> int:
        return self.lower.shape[0]


def react_fit(train_features: FeatureMatrix, percentile: float) -> ReactThreshold:
    """Nearest-rank percentile over all N*M training activations, flattened."""
    if not 0.0 < percentile <= 100.0:
        raise PercentileOutOfRange(f"percentile must lie in (0, 100], got {percentile}")
    return ReactThreshold(c=nearest_rank(train_features.data.ravel(), percentile))


def react_apply(z: FeatureMatrix, t: ReactThreshold) -> FeatureMatrix:
    """Clip activations from above at the fitted level; no lower clipping."""
    return FeatureMatrix(np.minimum(z.data, t.c))


def bats_apply(z: FeatureMatrix, mu: np.ndarray, sigma: np.ndarray,
               lam: float) -> FeatureMatrix:
    """Clip column k into [mu_k - lam*sigma_k, mu_k + lam*sigma_k]."""
    if lam < 0:
        raise NegativeLambda(f"lambda must be >= 0, got {lam}")
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if mu.shape != (z.n_channels,) or sigma.shape != (z.n_channels,):
        raise DimensionMismatch("mu/sigma length must equal the channel count")
    return FeatureMatrix(np.clip(z.data, mu - lam * sigma, mu + lam * sigma))


def laps_fit(mu: np.ndarray, sigma: np.ndarray, mu_bar: float, sigma_bar: float,
             lam: float, m: float, n: float) -> LapsBounds:
    """Channel-wise asymmetric scaling from global-local deviations.

    lambda1 = lam + m*(mu_bar - mu) + n*(sigma_bar - sigma) widens or
    narrows the upper side, lambda2 mirrors the m term for the lower
    side; both are clamped at 0 before the bounds are formed.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    dev_m = m * (mu_bar - mu)
    dev_n = n * (sigma_bar - sigma)
    lam1 = np.maximum(lam + dev_m + dev_n, 0.0)
    lam2 = np.maximum(lam - dev_m + dev_n, 0.0)
    return LapsBounds(lower=mu - lam2 * sigma, upper=mu + lam1 * sigma)


def laps_apply(z: FeatureMatrix, b: LapsBounds) -> FeatureMatrix:
    """Clip column i into [lower_i, upper_i]."""
    if b.n_channels != z.n_channels:
        raise DimensionMismatch(
            f"bounds cover {b.n_channels} channels, features have {z.n_channels}")
    return FeatureMatrix(np.clip(z.data, b.lower, b.upper))


def tsre_fit(profile: ChannelProfile, params: HyperParams) -> TypicalSet:
    """Channel-aware scaling factors and skew-translated clip interval.

    lambda_k = max(0, lambda + omega * D_k * (mu_bar - mu_k + sigma_bar
    - sigma_k) + A_k), with the omega term dropped when discriminability
    is disabled and A_k dropped when activity is disabled. Enabled skew
    translates both bounds by -skew_k.
    """
    mu, sigma = profile.mu, profile.sigma
    lam = np.full(profile.n_channels, float(params.lambda_base))
    if params.enable_discriminability:
        lam = lam + params.omega * profile.discriminability * (
            profile.mu_bar - mu + profile.sigma_bar - sigma)
    if params.enable_activity:
        lam = lam + params.activity_scale * profile.activity
    lam = np.maximum(lam, 0.0)
    lower = mu - lam * sigma
    upper = mu + lam * sigma
    if params.enable_skew:
        lower = lower - profile.skew
        upper = upper - profile.skew
    return TypicalSet(lower=lower, upper=upper, lambda_k=lam)


def tsre_apply(z: FeatureMatrix, ts: TypicalSet) -> FeatureMatrix:
    """Clip column k into [lower_k, upper_k]."""
    if ts.n_channels != z.n_channels:
        raise DimensionMismatch(
            f"typical set covers {ts.n_channels} channels, features have {z.n_channels}")
    return FeatureMatrix(np.clip(z.data, ts.lower, ts.upper))
