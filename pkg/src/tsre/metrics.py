"""Threshold selection, FPR95, AUROC and the binary ID/OOD decision.

Quantiles are nearest-rank (no interpolation) and the ID decision is
non-strict (score >= gamma counts as ID), including when counting OOD
false positives. AUROC uses the rank-statistic form with ties credited
0.5, computed in O((n+m) log(n+m)).
"""

from __future__ import annotations

import numpy as np

from .core import EmptyScores, EvalReport, ScoreSet


def threshold_at_tpr(id_scores: ScoreSet, target_tpr: float) -> float:
    """Largest gamma with fraction(id >= gamma) >= target_tpr.

    Nearest-rank form: the k-th smallest ID score, k = floor((1 -
    target_tpr) * n) + 1.
    """
    if not 0.0 < target_tpr <= 1.0:
        raise ValueError(f"target_tpr must lie in (0, 1], got {target_tpr}")
    n = len(id_scores)
    if n == 0:
        raise EmptyScores("no ID scores")
    k = int(np.floor((1.0 - target_tpr) * n)) + 1
    k = min(k, n)
    s = np.sort(id_scores.scores, kind="stable")
    return float(s[k - 1])


def fpr_at_tpr(id_scores: ScoreSet, ood_scores: ScoreSet, target_tpr: float) -> float:
    """Fraction of OOD scores accepted as ID at the target-TPR threshold."""
    if len(ood_scores) == 0:
        raise EmptyScores("no OOD scores")
    gamma = threshold_at_tpr(id_scores, target_tpr)
    return float(np.count_nonzero(ood_scores.scores >= gamma)) / len(ood_scores)


def auroc(id_scores: ScoreSet, ood_scores: ScoreSet) -> float:
    """P(id > ood) + 0.5 * P(id == ood) over all ID/OOD pairs.

    Computed from average ranks on the pooled sample; numerator counts
    are half-integers, so the result is exact up to the final division
    and satisfies auroc(A, B) + auroc(B, A) = 1.
    """
    a = id_scores.scores
    b = ood_scores.scores
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        raise EmptyScores("need nonempty ID and OOD score sets")
    pooled = np.concatenate([a, b])
    order = np.argsort(pooled, kind="stable")
    sorted_vals = pooled[order]
    # average rank per tie group (1-based ranks)
    ranks = np.empty(n + m, dtype=np.float64)
    boundaries = np.flatnonzero(np.diff(sorted_vals)) + 1
    starts = np.concatenate([[0], boundaries])
    stops = np.concatenate([boundaries, [n + m]])
    for s, t in zip(starts, stops):
        ranks[order[s:t]] = 0.5 * (s + 1 + t)  # mean of ranks s+1 .. t
    r_id = ranks[:n].sum()
    u = r_id - n * (n + 1) / 2.0
    return float(u) / (n * m)


def decide(score: float, gamma: float) -> str:
    """'ID' iff score >= gamma, else 'OOD'."""
    return "ID" if score >= gamma else "OOD"


def evaluate(id_scores: ScoreSet, ood_scores: ScoreSet,
             target_tpr: float = 0.95) -> EvalReport:
    """Bundle gamma, achieved TPR, FPR at the target TPR, and AUROC."""
    if len(id_scores) == 0 or len(ood_scores) == 0:
        raise EmptyScores("need nonempty ID and OOD score sets")
    gamma = threshold_at_tpr(id_scores, target_tpr)
    tpr = float(np.count_nonzero(id_scores.scores >= gamma)) / len(id_scores)
    fpr = float(np.count_nonzero(ood_scores.scores >= gamma)) / len(ood_scores)
    return EvalReport(
        gamma=gamma,
        tpr_achieved=tpr,
        fpr95=fpr,
        auroc=auroc(id_scores, ood_scores),
        n_id=len(id_scores),
        n_ood=len(ood_scores),
    )
