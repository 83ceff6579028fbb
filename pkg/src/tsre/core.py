"""Shared domain types, their invariants, and the error taxonomy.

Everything here is a frozen container over numpy arrays: construction
validates, arrays are copied to float64/int64 and marked read-only, and
no computation beyond validation happens in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class TsreError(Exception):
    """Base class for all library errors."""


class ValidationError(TsreError, ValueError):
    """Bad user input or violated invariant (CLI exit code 2)."""


class DimensionMismatch(ValidationError):
    pass


class LabelOutOfRange(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class EmptyClass(ValidationError):
    pass


class TooFewClasses(ValidationError):
    pass


class BalanceOutOfRange(ValidationError):
    pass


class PercentileOutOfRange(ValidationError):
    pass


class NegativeLambda(ValidationError):
    pass


class NonPositiveTemperature(ValidationError):
    pass


class EmptyScores(ValidationError):
    pass


class ChannelOutOfRange(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class UnsupportedVersion(ValidationError):
    pass


class ParseFailure(ValidationError):
    pass


class IoFailure(TsreError, OSError):
    """Filesystem-level failure (CLI exit code 3)."""


# ---------------------------------------------------------------------------
# Array helpers
# ---------------------------------------------------------------------------

def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def _require_finite(a: np.ndarray, what: str) -> None:
    if a.size and not np.isfinite(a).all():
        idx = np.unravel_index(int(np.argmin(np.isfinite(a))), a.shape)
        raise NonFiniteValue(f"{what} contains a non-finite value at {tuple(int(i) for i in idx)}")


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureMatrix:
    """N x M matrix of penultimate-layer activations, one sample per row."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionMismatch(f"feature matrix must be 2-D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise EmptyInput(f"feature matrix needs at least one row and one column, got {data.shape}")
        _require_finite(data, "feature matrix")
        object.__setattr__(self, "data", _frozen(data, np.float64))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Integer class indices, zero-based, paired with a FeatureMatrix."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionMismatch(f"labels must be 1-D, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.floor(labels)):
                raise LabelOutOfRange("labels must be integers")
        labels = labels.astype(np.int64)
        if labels.size and labels.min() < 0:
            i = int(np.argmin(labels))
            raise LabelOutOfRange(f"label {int(labels[i])} at index {i} is negative")
        object.__setattr__(self, "labels", _frozen(labels, np.int64))

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass(frozen=True)
class ClassifierHead:
    """Affine map from features to logits: logits = z @ weights.T + bias."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise DimensionMismatch(f"head weights must be 2-D, got shape {w.shape}")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise DimensionMismatch(
                f"head bias length {b.shape} does not match weight rows {w.shape[0]}")
        _require_finite(w, "head weights")
        _require_finite(b, "head bias")
        object.__setattr__(self, "weights", _frozen(w, np.float64))
        object.__setattr__(self, "bias", _frozen(b, np.float64))

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_channels(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Prototypes:
    """Per-class mean feature vectors, row c = class-c prototype."""

    matrix: np.ndarray
    class_counts: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        counts = np.asarray(self.class_counts, dtype=np.int64)
        if m.ndim != 2:
            raise DimensionMismatch(f"prototype matrix must be 2-D, got shape {m.shape}")
        if counts.ndim != 1 or counts.shape[0] != m.shape[0]:
            raise DimensionMismatch("class_counts length must equal prototype rows")
        if counts.size and counts.min() < 1:
            c = int(np.argmin(counts))
            raise EmptyClass(f"class {c} has no samples")
        _require_finite(m, "prototype matrix")
        object.__setattr__(self, "matrix", _frozen(m, np.float64))
        object.__setattr__(self, "class_counts", _frozen(counts, np.int64))

    @property
    def n_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ChannelProfile:
    """Per-channel statistics fitted on ID training features.

    mu/sigma are training-feature moments (population convention),
    mu_bar/sigma_bar their global means; similarity, variance,
    discriminability, activity and skew are the prototype-derived
    channel characteristics. Factors disabled at fit time are stored
    as zero vectors.
    """

    mu: np.ndarray
    sigma: np.ndarray
    mu_bar: float
    sigma_bar: float
    similarity: np.ndarray
    variance: np.ndarray
    discriminability: np.ndarray
    activity: np.ndarray
    skew: np.ndarray

    def __post_init__(self):
        vecs = {}
        m = None
        for name in ("mu", "sigma", "similarity", "variance", "discriminability",
                     "activity", "skew"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.ndim != 1:
                raise DimensionMismatch(f"{name} must be 1-D")
            if m is None:
                m = v.shape[0]
            elif v.shape[0] != m:
                raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {m}")
            _require_finite(v, name)
            vecs[name] = v
        if m < 1:
            raise EmptyInput("profile needs at least one channel")
        if vecs["sigma"].min() < 0:
            raise ValidationError("sigma entries must be >= 0")
        if vecs["activity"].min() < 0:
            raise ValidationError("activity entries must be >= 0")
        if vecs["variance"].min() < 0:
            raise ValidationError("variance entries must be >= 0")
        if vecs["similarity"].min() < -1 or vecs["similarity"].max() > 1:
            raise ValidationError("similarity entries must lie in [-1, 1]")
        for name, v in vecs.items():
            object.__setattr__(self, name, _frozen(v, np.float64))
        object.__setattr__(self, "mu_bar", float(self.mu_bar))
        object.__setattr__(self, "sigma_bar", float(self.sigma_bar))

    @property
    def n_channels(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class TypicalSet:
    """Per-channel rectification interval [lower_k, upper_k] with its scaling factors."""

    lower: np.ndarray
    upper: np.ndarray
    lambda_k: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        lam = np.asarray(self.lambda_k, dtype=np.float64)
        if not (lo.ndim == hi.ndim == lam.ndim == 1) or not (lo.shape == hi.shape == lam.shape):
            raise DimensionMismatch("lower/upper/lambda_k must be 1-D vectors of equal length")
        _require_finite(lo, "lower bounds")
        _require_finite(hi, "upper bounds")
        _require_finite(lam, "lambda_k")
        if np.any(lo > hi):
            k = int(np.argmax(lo > hi))
            raise ValidationError(f"lower[{k}]={lo[k]} exceeds upper[{k}]={hi[k]}")
        if lam.size and lam.min() < 0:
            raise NegativeLambda("lambda_k entries must be >= 0")
        object.__setattr__(self, "lower", _frozen(lo, np.float64))
        object.__setattr__(self, "upper", _frozen(hi, np.float64))
        object.__setattr__(self, "lambda_k", _frozen(lam, np.float64))

    @property
    def n_channels(self) -> int:
        return self.lower.shape[0]


SIMILARITY_MODES = ("sign", "abs-diff")
SKEW_SOURCES = ("prototypes", "train-features")


@dataclass(frozen=True)
class HyperParams:
    """Hyperparameters for fitting and rectification.

    lambda_base is the shared scaling factor of BATS/LAPS/TSRE; omega
    weights the discriminability term; a_balance blends similarity vs
    variance; percentile_p gates channel activity; laps_m/laps_n are the
    LAPS deviation weights; react_percentile sets the ReAct clip level.
    """

    lambda_base: float = 1.0
    omega: float = 21.0
    a_balance: float = 0.5
    percentile_p: float = 5.0
    enable_activity: bool = True
    enable_skew: bool = True
    enable_discriminability: bool = True
    laps_m: float = 1.0
    laps_n: float = 1.0
    react_percentile: float = 90.0
    similarity_mode: str = "sign"
    skew_source: str = "prototypes"
    activity_scale: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.a_balance <= 1.0:
            raise BalanceOutOfRange(f"a_balance must lie in [0, 1], got {self.a_balance}")
        if not 0.0 < self.percentile_p <= 100.0:
            raise PercentileOutOfRange(f"percentile_p must lie in (0, 100], got {self.percentile_p}")
        if not 0.0 < self.react_percentile <= 100.0:
            raise PercentileOutOfRange(
                f"react_percentile must lie in (0, 100], got {self.react_percentile}")
        if self.lambda_base < 0:
            raise NegativeLambda(f"lambda_base must be >= 0, got {self.lambda_base}")
        if self.similarity_mode not in SIMILARITY_MODES:
            raise InvalidConfig(f"similarity_mode must be one of {SIMILARITY_MODES}")
        if self.skew_source not in SKEW_SOURCES:
            raise InvalidConfig(f"skew_source must be one of {SKEW_SOURCES}")


@dataclass(frozen=True)
class ScoreSet:
    """One OOD score per sample; higher means more in-distribution."""

    scores: np.ndarray
    method_tag: str = ""

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1:
            raise DimensionMismatch(f"scores must be 1-D, got shape {s.shape}")
        _require_finite(s, "scores")
        object.__setattr__(self, "scores", _frozen(s, np.float64))

    def __len__(self) -> int:
        return int(self.scores.shape[0])


@dataclass(frozen=True)
class EvalReport:
    """FPR95/AUROC evaluation of one ID score set against one OOD score set."""

    gamma: float
    tpr_achieved: float
    fpr95: float
    auroc: float
    n_id: int
    n_ood: int

    def __post_init__(self):
        if not 0.0 <= self.fpr95 <= 1.0:
            raise ValidationError(f"fpr95 must lie in [0, 1], got {self.fpr95}")
        if not 0.0 <= self.auroc <= 1.0:
            raise ValidationError(f"auroc must lie in [0, 1], got {self.auroc}")
        if not 0.0 <= self.tpr_achieved <= 1.0:
            raise ValidationError(f"tpr_achieved must lie in [0, 1], got {self.tpr_achieved}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_bundle(features: FeatureMatrix, labels: LabelVector,
                    head: ClassifierHead | None = None,
                    n_classes: int | None = None) -> None:
    """Check dimension agreement, label range and finiteness of a bundle.

    Raises the first violation found (DimensionMismatch, LabelOutOfRange,
    NonFiniteValue); finiteness is already guaranteed by the constructors,
    so this mainly cross-checks the pieces against each other. Deterministic
    and side-effect free.
    """
    if len(labels) != features.n_samples:
        raise DimensionMismatch(
            f"{len(labels)} labels for {features.n_samples} feature rows")
    if head is not None:
        if head.n_channels != features.n_channels:
            raise DimensionMismatch(
                f"head expects {head.n_channels} channels, features have {features.n_channels}")
        if n_classes is None:
            n_classes = head.n_classes
        elif n_classes != head.n_classes:
            raise DimensionMismatch(
                f"declared n_classes {n_classes} != head rows {head.n_classes}")
    if n_classes is not None and labels.labels.size:
        hi = int(labels.labels.max())
        if hi >= n_classes:
            i = int(np.argmax(labels.labels == hi))
            raise LabelOutOfRange(
                f"label {hi} at index {i} outside [0, {n_classes})")
