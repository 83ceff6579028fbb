"""Command-line front end.

Subcommands: fit, score, eval, compare, sweep, synth, hist. Every
command is deterministic given identical inputs and flags. Exit codes:
0 success, 2 user/validation error, 3 I/O failure. The TSRE_THREADS
environment variable caps BLAS worker parallelism (0 or unset = auto).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import dataio, metrics, rectifiers, scoring, stats, synth
from .core import (
    ChannelOutOfRange,
    FeatureMatrix,
    HyperParams,
    InvalidConfig,
    IoFailure,
    TsreError,
    ValidationError,
)
from .dataio import FittedState, _write_text

SCORE_METHODS = ("none", "react", "bats", "laps", "tsre")
ABLATION_METHODS = ("tsre-no-activity", "tsre-no-skew", "tsre-no-discriminability")
COMPARE_METHODS = SCORE_METHODS + ABLATION_METHODS
SWEEP_PARAMS = ("omega", "p", "lambda", "a")


def _fmt(x: float) -> str:
    return repr(float(x))


def _params_from_args(args) -> HyperParams:
    return HyperParams(
        lambda_base=args.lambda_base,
        omega=args.omega,
        a_balance=args.a_balance,
        percentile_p=args.percentile_p,
        enable_activity=not args.no_activity,
        enable_skew=not args.no_skew,
        enable_discriminability=not args.no_discriminability,
        laps_m=args.laps_m,
        laps_n=args.laps_n,
        react_percentile=args.react_percentile,
        similarity_mode=args.similarity,
        skew_source=args.skew_source,
        activity_scale=args.activity_scale,
    )


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lambda_base", type=float, default=1.0,
                   help="base scaling factor (default 1.0)")
    p.add_argument("--omega", type=float, default=21.0,
                   help="discriminability weight (default 21)")
    p.add_argument("--a", dest="a_balance", type=float, default=0.5,
                   help="similarity/variance balance in [0,1] (default 0.5)")
    p.add_argument("--p", dest="percentile_p", type=float, default=5.0,
                   help="activity percentile gate in (0,100] (default 5)")
    p.add_argument("--no-activity", action="store_true")
    p.add_argument("--no-skew", action="store_true")
    p.add_argument("--no-discriminability", action="store_true")
    p.add_argument("--similarity", choices=("sign", "abs-diff"), default="sign")
    p.add_argument("--skew-source", choices=("prototypes", "train-features"),
                   default="prototypes")
    p.add_argument("--laps-m", type=float, default=1.0)
    p.add_argument("--laps-n", type=float, default=1.0)
    p.add_argument("--react-percentile", type=float, default=90.0)
    p.add_argument("--activity-scale", type=float, default=1.0)


def fit_state(features: FeatureMatrix, labels, n_classes: int | None,
              params: HyperParams) -> FittedState:
    """Fit the profile and all three rectifier states from a train bundle.

    n_classes=None infers the class count from the labels, so bundles whose
    head covers more classes than the training images (partial extractions)
    still fit over the populated classes.
    """
    profile, _ = stats.fit_profile(features, labels, params, n_classes=n_classes)
    ts = rectifiers.tsre_fit(profile, params)
    laps = rectifiers.laps_fit(profile.mu, profile.sigma, profile.mu_bar,
                               profile.sigma_bar, params.lambda_base,
                               params.laps_m, params.laps_n)
    react = rectifiers.react_fit(features, params.react_percentile)
    return FittedState(profile=profile, typical_set=ts, laps_bounds=laps,
                       react_threshold=react, params=params)


def rectifier_for_method(method: str, state: FittedState):
    """Rectify callable for a method name, or None for the identity."""
    if method == "none":
        return None
    if method == "react":
        return lambda z: rectifiers.react_apply(z, state.react_threshold)
    if method == "bats":
        p = state.profile
        lam = state.params.lambda_base
        return lambda z: rectifiers.bats_apply(z, p.mu, p.sigma, lam)
    if method == "laps":
        return lambda z: rectifiers.laps_apply(z, state.laps_bounds)
    if method == "tsre":
        return lambda z: rectifiers.tsre_apply(z, state.typical_set)
    if method in ABLATION_METHODS:
        flag = {"tsre-no-activity": "enable_activity",
                "tsre-no-skew": "enable_skew",
                "tsre-no-discriminability": "enable_discriminability"}[method]
        ts = rectifiers.tsre_fit(state.profile, replace(state.params, **{flag: False}))
        return lambda z: rectifiers.tsre_apply(z, ts)
    raise ValidationError(f"unknown method {method!r}")


def _dedup(items: list[str], what: str) -> list[str]:
    seen: list[str] = []
    for it in items:
        if it in seen:
            print(f"warning: duplicate {what} {it!r} ignored", file=sys.stderr)
        else:
            seen.append(it)
    return seen


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    features, labels, _, _ = dataio.read_bundle(args.bundle)
    params = _params_from_args(args)
    state = fit_state(features, labels, None, params)
    dataio.write_profile(args.out, state)
    lam = state.typical_set.lambda_k
    n_fit_classes = int(labels.labels.max()) + 1
    print(f"channels = {features.n_channels}")
    print(f"classes = {n_fit_classes}")
    print(f"lambda_k min = {_fmt(lam.min())}")
    print(f"lambda_k median = {_fmt(np.median(lam))}")
    print(f"lambda_k max = {_fmt(lam.max())}")
    return 0


def cmd_score(args) -> int:
    features, _, head, _ = dataio.read_bundle(args.bundle)
    if head is None:
        raise ValidationError(f"bundle {args.bundle} has no classifier head")
    state = dataio.read_profile(args.profile)
    if state.profile.n_channels != features.n_channels:
        raise ValidationError(
            f"profile covers {state.profile.n_channels} channels, "
            f"bundle has {features.n_channels}")
    rectify = rectifier_for_method(args.method, state)
    scores = scoring.score_pipeline(features, head, rectify, args.score,
                                    args.temperature)
    dataio.write_scores(args.out, scores)
    print(f"wrote {len(scores)} scores to {args.out}")
    return 0


def cmd_eval(args) -> int:
    id_scores = dataio.read_scores(args.id)
    ood_scores = dataio.read_scores(args.ood)
    report = metrics.evaluate(id_scores, ood_scores, args.tpr)
    dataio.write_report(args.out, report)
    if args.csv:
        rows = [dataio.REPORT_CSV_HEADER,
                dataio.report_csv_row(args.method_label, args.ood_label, report)]
        _write_text(Path(args.csv), "\n".join(rows) + "\n")
    print(dataio.format_report(report), end="")
    return 0


def _comparison_rows(state: FittedState, id_features, head, ood_bundles,
                     methods, score_names, temperature, target_tpr):
    """CSV data rows (method,score,ood_set,fpr95,auroc), avg row after each group."""
    rows = []
    for method in methods:
        rectify = rectifier_for_method(method, state)
        for score_name in score_names:
            id_scores = scoring.score_pipeline(id_features, head, rectify,
                                               score_name, temperature)
            reports = []
            for name, ood_features in ood_bundles:
                ood_scores = scoring.score_pipeline(ood_features, head, rectify,
                                                    score_name, temperature)
                rep = metrics.evaluate(id_scores, ood_scores, target_tpr)
                reports.append(rep)
                rows.append((method, score_name, name, rep.fpr95, rep.auroc))
            avg_fpr = sum(r.fpr95 for r in reports) / len(reports)
            avg_auroc = sum(r.auroc for r in reports) / len(reports)
            rows.append((method, score_name, "avg", avg_fpr, avg_auroc))
    return rows


def _load_eval_inputs(args):
    train_features, train_labels, head, man = dataio.read_bundle(args.bundle)
    if head is None:
        raise ValidationError(f"bundle {args.bundle} has no classifier head")
    if args.id_bundle:
        id_features, _, _, id_man = dataio.read_bundle(args.id_bundle)
        if id_man.n_channels != man.n_channels:
            raise ValidationError("ID bundle channel count differs from train bundle")
    else:
        id_features = train_features
    ood_bundles = []
    for ood_dir in args.ood_bundles:
        ood_features, _, _, ood_man = dataio.read_bundle(ood_dir)
        if ood_man.n_channels != man.n_channels:
            raise ValidationError(f"OOD bundle {ood_dir} channel count differs")
        ood_bundles.append((Path(ood_dir).name, ood_features))
    return train_features, train_labels, head, id_features, ood_bundles


def cmd_compare(args) -> int:
    (train_features, train_labels, head,
     id_features, ood_bundles) = _load_eval_inputs(args)
    methods = _dedup(args.methods, "method")
    for m in methods:
        if m not in COMPARE_METHODS:
            raise ValidationError(f"unknown method {m!r}; choose from {COMPARE_METHODS}")
    score_names = _dedup(args.scores, "score")
    for s in score_names:
        if s not in scoring.SCORE_NAMES:
            raise ValidationError(f"unknown score {s!r}; choose from {scoring.SCORE_NAMES}")

    params = _params_from_args(args)
    state = fit_state(train_features, train_labels, None, params)
    rows = _comparison_rows(state, id_features, head, ood_bundles, methods,
                            score_names, args.temperature, args.tpr)
    lines = ["method,score,ood_set,fpr95,auroc"]
    lines += [f"{m},{s},{o},{_fmt(f)},{_fmt(a)}" for m, s, o, f, a in rows]
    _write_text(Path(args.out), "\n".join(lines) + "\n")
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    (train_features, train_labels, head,
     id_features, ood_bundles) = _load_eval_inputs(args)
    field = {"omega": "omega", "p": "percentile_p", "lambda": "lambda_base",
             "a": "a_balance"}[args.param]
    base = _params_from_args(args)
    lines = ["param,value,fpr95,auroc"]
    for value in args.values:
        params = replace(base, **{field: value})
        state = fit_state(train_features, train_labels, None, params)
        rows = _comparison_rows(state, id_features, head, ood_bundles, ["tsre"],
                                ["energy"], args.temperature, args.tpr)
        _, _, _, fpr, auc = rows[-1]  # avg row
        lines.append(f"{args.param},{_fmt(value)},{_fmt(fpr)},{_fmt(auc)}")
    _write_text(Path(args.out), "\n".join(lines) + "\n")
    print(f"wrote {len(args.values)} rows to {args.out}")
    return 0


def cmd_synth(args) -> int:
    config = synth.SynthConfig(
        seed=args.seed, n_classes=args.classes, n_channels=args.channels,
        n_id_train=args.id_train, n_id_test=args.id_test, n_ood=args.ood,
        skew_shape=(args.shape_low, args.shape_high),
        class_separation=args.separation, ood_shift=args.shift,
        noise_scale=args.noise,
    )
    (train, train_labels), (id_test, test_labels), (ood, ood_labels), head = \
        synth.generate(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataio.write_bundle(out / "train", train, train_labels, head)
    dataio.write_bundle(out / "id_test", id_test, test_labels, head)
    dataio.write_bundle(out / "ood", ood, ood_labels, head)
    synth.write_config(out, config)
    print(f"wrote train/id_test/ood bundles under {out}")
    return 0


def cmd_hist(args) -> int:
    features, _, _, man = dataio.read_bundle(args.bundle)
    if not 0 <= args.channel < man.n_channels:
        raise ChannelOutOfRange(
            f"channel {args.channel} outside [0, {man.n_channels})")
    if args.bins < 1:
        raise InvalidConfig(f"bins must be >= 1, got {args.bins}")
    col = features.data[:, args.channel]
    counts, edges = np.histogram(col, bins=args.bins)
    mu = col.mean()
    sigma = col.std()
    centers = 0.5 * (edges[:-1] + edges[1:])
    if sigma > 0:
        dens = np.exp(-0.5 * ((centers - mu) / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))
    else:
        dens = np.zeros_like(centers)
    lines = ["bin_left,bin_right,count,gaussian_density"]
    for i in range(args.bins):
        lines.append(f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{int(counts[i])},{_fmt(dens[i])}")
    _write_text(Path(args.out), "\n".join(lines) + "\n")
    print(f"wrote {args.bins} bins to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsre",
        description="Typical-set refinement OOD detection benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit channel profile and rectifier states")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score a bundle through a rectifier + score function")
    p.add_argument("--bundle", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--method", choices=SCORE_METHODS, required=True)
    p.add_argument("--score", choices=scoring.SCORE_NAMES, required=True)
    p.add_argument("--temperature", type=float, default=1000.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="FPR95/AUROC of an ID score file vs an OOD score file")
    p.add_argument("--id", required=True)
    p.add_argument("--ood", required=True)
    p.add_argument("--tpr", type=float, default=0.95)
    p.add_argument("--out", required=True)
    p.add_argument("--csv", default=None)
    p.add_argument("--method-label", default="method")
    p.add_argument("--ood-label", default="ood")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="method x score x OOD-set comparison table")
    p.add_argument("--bundle", required=True, help="ID train bundle (fitting)")
    p.add_argument("--id-bundle", default=None, help="held-out ID bundle (default: --bundle)")
    p.add_argument("--ood-bundles", nargs="+", required=True)
    p.add_argument("--methods", nargs="+", required=True)
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--temperature", type=float, default=1000.0)
    p.add_argument("--tpr", type=float, default=0.95)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="sensitivity sweep of one hyperparameter")
    p.add_argument("--bundle", required=True)
    p.add_argument("--id-bundle", default=None)
    p.add_argument("--ood-bundles", nargs="+", required=True)
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", nargs="+", type=float, required=True)
    p.add_argument("--temperature", type=float, default=1000.0)
    p.add_argument("--tpr", type=float, default=0.95)
    p.add_argument("--out", required=True)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate the seeded synthetic benchmark")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--id-train", type=int, default=5000)
    p.add_argument("--id-test", type=int, default=2000)
    p.add_argument("--ood", type=int, default=2000)
    p.add_argument("--shape-low", type=float, default=0.5)
    p.add_argument("--shape-high", type=float, default=4.0)
    p.add_argument("--separation", type=float, default=0.3)
    p.add_argument("--shift", type=float, default=0.5)
    p.add_argument("--noise", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("hist", help="channel activation histogram + Gaussian overlay CSV")
    p.add_argument("--bundle", required=True)
    p.add_argument("--channel", type=int, required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)

    return parser


def _apply_thread_cap() -> None:
    raw = os.environ.get("TSRE_THREADS")
    if raw is None:
        return
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"TSRE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValidationError(f"TSRE_THREADS must be >= 0, got {n}")
    if n == 0:
        return  # auto
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=n)
    except ImportError:
        pass  # no BLAS pool control available; vectorized math stays single-threaded


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_thread_cap()
        return args.func(args)
    except IoFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (ValidationError, TsreError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
