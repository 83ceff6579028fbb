"""Bit-exact on-disk interchange: bundles, fitted profiles, score files.

A bundle directory holds `manifest.txt` (UTF-8 `key = value` lines, keys
sorted) plus raw little-endian tensors: `features.f32` (float32,
row-major), `labels.i32` (int32), and optionally `head_weights.f32` /
`head_bias.f32`. Profiles and score sets are line-oriented text using
the shortest round-trip decimal form of each 64-bit float, so read after
write reproduces every value bitwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    ChannelProfile,
    ClassifierHead,
    EmptyInput,
    EvalReport,
    FeatureMatrix,
    HyperParams,
    IoFailure,
    LabelVector,
    ParseFailure,
    ScoreSet,
    ShapeMismatch,
    TypicalSet,
    UnsupportedVersion,
    validate_bundle,
)
from .rectifiers import LapsBounds, ReactThreshold

FORMAT_VERSION = 1
DEFAULT_SIZE_CAP = 2 << 30  # bytes per declared tensor

FEATURES_FILE = "features.f32"
LABELS_FILE = "labels.i32"
HEAD_WEIGHTS_FILE = "head_weights.f32"
HEAD_BIAS_FILE = "head_bias.f32"
MANIFEST_FILE = "manifest.txt"


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt_vector(v: np.ndarray) -> str:
    return " ".join(_fmt_float(x) for x in v)


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BundleManifest:
    format_version: int
    n_samples: int
    n_channels: int
    n_classes: int
    features: str = FEATURES_FILE
    labels: str = LABELS_FILE
    head_weights: str | None = None
    head_bias: str | None = None
    dtype_features: str = "f32le"
    dtype_labels: str = "i32le"


def write_bundle(dir_path: str | os.PathLike, features: FeatureMatrix,
                 labels: LabelVector, head: ClassifierHead | None = None,
                 n_classes: int | None = None) -> BundleManifest:
    """Write manifest plus raw tensors; returns the manifest written."""
    if n_classes is None:
        if head is not None:
            n_classes = head.n_classes
        else:
            n_classes = int(labels.labels.max()) + 1 if len(labels) else 0
    validate_bundle(features, labels, head, n_classes=n_classes)

    d = Path(dir_path)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create bundle directory {d}: {e}") from e

    entries = {
        "format_version": str(FORMAT_VERSION),
        "n_samples": str(features.n_samples),
        "n_channels": str(features.n_channels),
        "n_classes": str(n_classes),
        "features": FEATURES_FILE,
        "labels": LABELS_FILE,
        "dtype_features": "f32le",
        "dtype_labels": "i32le",
    }
    try:
        features.data.astype("<f4").tofile(d / FEATURES_FILE)
        labels.labels.astype("<i4").tofile(d / LABELS_FILE)
        if head is not None:
            head.weights.astype("<f4").tofile(d / HEAD_WEIGHTS_FILE)
            head.bias.astype("<f4").tofile(d / HEAD_BIAS_FILE)
            entries["head_weights"] = HEAD_WEIGHTS_FILE
            entries["head_bias"] = HEAD_BIAS_FILE
    except OSError as e:
        raise IoFailure(f"cannot write tensors under {d}: {e}") from e

    lines = [f"{k} = {entries[k]}" for k in sorted(entries)]
    _write_text(d / MANIFEST_FILE, "\n".join(lines) + "\n")
    return BundleManifest(
        format_version=FORMAT_VERSION,
        n_samples=features.n_samples,
        n_channels=features.n_channels,
        n_classes=n_classes,
        head_weights=entries.get("head_weights"),
        head_bias=entries.get("head_bias"),
    )


def _parse_kv_lines(text: str, path: Path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseFailure(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def read_manifest(dir_path: str | os.PathLike) -> BundleManifest:
    d = Path(dir_path)
    path = d / MANIFEST_FILE
    if not path.is_file():
        raise IoFailure(f"missing manifest {path}")
    kv = _parse_kv_lines(_read_text(path), path)

    def _int(key: str) -> int:
        if key not in kv:
            raise ParseFailure(f"{path}: missing key {key!r}")
        try:
            return int(kv[key])
        except ValueError:
            raise ParseFailure(f"{path}: key {key!r} is not an integer: {kv[key]!r}") from None

    version = _int("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: format_version {version} not supported")
    return BundleManifest(
        format_version=version,
        n_samples=_int("n_samples"),
        n_channels=_int("n_channels"),
        n_classes=_int("n_classes"),
        features=kv.get("features", FEATURES_FILE),
        labels=kv.get("labels", LABELS_FILE),
        head_weights=kv.get("head_weights"),
        head_bias=kv.get("head_bias"),
        dtype_features=kv.get("dtype_features", "f32le"),
        dtype_labels=kv.get("dtype_labels", "i32le"),
    )


def _read_tensor(d: Path, name: str, dtype: str, shape: tuple[int, ...],
                 size_cap: int) -> np.ndarray:
    path = d / name
    item = np.dtype(dtype).itemsize
    count = 1
    for s in shape:
        count *= s
    expected = count * item
    if expected > size_cap:
        raise ShapeMismatch(
            f"{path}: declared size {expected} bytes exceeds cap {size_cap}")
    if not path.is_file():
        raise IoFailure(f"missing tensor file {path}")
    actual = path.stat().st_size
    if actual != expected:
        raise ShapeMismatch(
            f"{path}: file holds {actual} bytes, manifest declares {expected}")
    data = np.fromfile(path, dtype=dtype)
    return data.reshape(shape)


def read_bundle(dir_path: str | os.PathLike, size_cap: int = DEFAULT_SIZE_CAP):
    """Read and validate a bundle; returns (features, labels, head_or_None, manifest)."""
    d = Path(dir_path)
    man = read_manifest(d)
    if man.dtype_features != "f32le":
        raise ParseFailure(f"unsupported feature dtype tag {man.dtype_features!r}")
    if man.dtype_labels != "i32le":
        raise ParseFailure(f"unsupported label dtype tag {man.dtype_labels!r}")

    z = _read_tensor(d, man.features, "<f4", (man.n_samples, man.n_channels), size_cap)
    y = _read_tensor(d, man.labels, "<i4", (man.n_samples,), size_cap)
    features = FeatureMatrix(z.astype(np.float64))
    labels = LabelVector(y.astype(np.int64))

    head = None
    if man.head_weights is not None:
        if man.head_bias is None:
            raise ParseFailure(f"{d}: head_weights declared without head_bias")
        w = _read_tensor(d, man.head_weights, "<f4", (man.n_classes, man.n_channels), size_cap)
        b = _read_tensor(d, man.head_bias, "<f4", (man.n_classes,), size_cap)
        head = ClassifierHead(weights=w.astype(np.float64), bias=b.astype(np.float64))

    validate_bundle(features, labels, head, n_classes=man.n_classes)
    return features, labels, head, man


# ---------------------------------------------------------------------------
# Fitted state (profile + rectifier parameters)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FittedState:
    """Everything cmd_score needs: channel profile, the three fitted
    rectifier states, and the hyperparameters they were fitted with."""

    profile: ChannelProfile
    typical_set: TypicalSet
    laps_bounds: LapsBounds
    react_threshold: ReactThreshold
    params: HyperParams


_PROFILE_VECTORS = ("mu", "sigma", "similarity", "variance", "discriminability",
                    "activity", "skew")
_HP_FLOATS = ("lambda_base", "omega", "a_balance", "percentile_p", "laps_m",
              "laps_n", "react_percentile", "activity_scale")
_HP_FLAGS = ("enable_activity", "enable_skew", "enable_discriminability")
_HP_STRS = ("similarity_mode", "skew_source")


def write_profile(path: str | os.PathLike, state: FittedState) -> None:
    """Serialize a fitted state to line-oriented text, full precision."""
    m = state.profile.n_channels
    if m < 1:
        raise EmptyInput("profile needs at least one channel")
    p = state.params
    lines = [f"format_version = {FORMAT_VERSION}", f"n_channels = {m}"]
    for name in _HP_FLOATS:
        lines.append(f"{name} = {_fmt_float(getattr(p, name))}")
    for name in _HP_FLAGS:
        lines.append(f"{name} = {'true' if getattr(p, name) else 'false'}")
    for name in _HP_STRS:
        lines.append(f"{name} = {getattr(p, name)}")
    for name in _PROFILE_VECTORS:
        lines.append(f"{name} = {_fmt_vector(getattr(state.profile, name))}")
    lines.append(f"mu_bar = {_fmt_float(state.profile.mu_bar)}")
    lines.append(f"sigma_bar = {_fmt_float(state.profile.sigma_bar)}")
    lines.append(f"ts_lower = {_fmt_vector(state.typical_set.lower)}")
    lines.append(f"ts_upper = {_fmt_vector(state.typical_set.upper)}")
    lines.append(f"ts_lambda = {_fmt_vector(state.typical_set.lambda_k)}")
    lines.append(f"laps_lower = {_fmt_vector(state.laps_bounds.lower)}")
    lines.append(f"laps_upper = {_fmt_vector(state.laps_bounds.upper)}")
    lines.append(f"react_c = {_fmt_float(state.react_threshold.c)}")
    _write_text(Path(path), "\n".join(lines) + "\n")


def read_profile(path: str | os.PathLike) -> FittedState:
    """Parse a fitted state; invariants are re-validated on construction."""
    p = Path(path)
    if not p.is_file():
        raise IoFailure(f"missing profile file {p}")
    raw: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(_read_text(p).splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseFailure(f"{p}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        raw[key.strip()] = (lineno, value.strip())

    def _get(key: str) -> tuple[int, str]:
        if key not in raw:
            raise ParseFailure(f"{p}: missing key {key!r}")
        return raw[key]

    def _float(key: str) -> float:
        lineno, s = _get(key)
        try:
            return float(s)
        except ValueError:
            raise ParseFailure(f"{p}:{lineno}: bad float for {key!r}: {s!r}") from None

    def _vector(key: str, m: int) -> np.ndarray:
        lineno, s = _get(key)
        parts = s.split() if s else []
        if len(parts) != m:
            raise ParseFailure(f"{p}:{lineno}: {key!r} has {len(parts)} entries, expected {m}")
        try:
            return np.array([float(x) for x in parts], dtype=np.float64)
        except ValueError:
            raise ParseFailure(f"{p}:{lineno}: bad float in {key!r}") from None

    def _flag(key: str) -> bool:
        lineno, s = _get(key)
        if s not in ("true", "false"):
            raise ParseFailure(f"{p}:{lineno}: bad flag for {key!r}: {s!r}")
        return s == "true"

    lineno, s = _get("format_version")
    if s != str(FORMAT_VERSION):
        raise UnsupportedVersion(f"{p}:{lineno}: format_version {s} not supported")
    lineno, s = _get("n_channels")
    try:
        m = int(s)
    except ValueError:
        raise ParseFailure(f"{p}:{lineno}: bad n_channels {s!r}") from None

    params = HyperParams(
        **{name: _float(name) for name in _HP_FLOATS},
        **{name: _flag(name) for name in _HP_FLAGS},
        **{name: _get(name)[1] for name in _HP_STRS},
    )
    profile = ChannelProfile(
        **{name: _vector(name, m) for name in _PROFILE_VECTORS},
        mu_bar=_float("mu_bar"),
        sigma_bar=_float("sigma_bar"),
    )
    ts = TypicalSet(lower=_vector("ts_lower", m), upper=_vector("ts_upper", m),
                    lambda_k=_vector("ts_lambda", m))
    laps = LapsBounds(lower=_vector("laps_lower", m), upper=_vector("laps_upper", m))
    react = ReactThreshold(c=_float("react_c"))
    return FittedState(profile=profile, typical_set=ts, laps_bounds=laps,
                       react_threshold=react, params=params)


# ---------------------------------------------------------------------------
# Evaluation reports
# ---------------------------------------------------------------------------

REPORT_CSV_HEADER = "method,ood_set,fpr95,auroc"


def format_report(report: EvalReport) -> str:
    """Flat key-value record, one field per line."""
    lines = [
        f"gamma = {_fmt_float(report.gamma)}",
        f"tpr_achieved = {_fmt_float(report.tpr_achieved)}",
        f"fpr95 = {_fmt_float(report.fpr95)}",
        f"auroc = {_fmt_float(report.auroc)}",
        f"n_id = {report.n_id}",
        f"n_ood = {report.n_ood}",
    ]
    return "\n".join(lines) + "\n"


def report_csv_row(method: str, ood_set: str, report: EvalReport) -> str:
    return f"{method},{ood_set},{_fmt_float(report.fpr95)},{_fmt_float(report.auroc)}"


def write_report(path: str | os.PathLike, report: EvalReport) -> None:
    _write_text(Path(path), format_report(report))


# ---------------------------------------------------------------------------
# Score files
# ---------------------------------------------------------------------------

def write_scores(path: str | os.PathLike, scores: ScoreSet) -> None:
    """One decimal score per line, newline-terminated, shortest round-trip text."""
    body = "".join(_fmt_float(x) + "\n" for x in scores.scores)
    _write_text(Path(path), body)


def read_scores(path: str | os.PathLike, method_tag: str = "") -> ScoreSet:
    p = Path(path)
    if not p.is_file():
        raise IoFailure(f"missing score file {p}")
    values = []
    for lineno, line in enumerate(_read_text(p).splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise ParseFailure(f"{p}:{lineno}: not a number: {line!r}") from None
    return ScoreSet(scores=np.array(values, dtype=np.float64), method_tag=method_tag)
