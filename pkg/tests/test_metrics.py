import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsre.core import EmptyScores, ScoreSet
from tsre.metrics import auroc, decide, evaluate, fpr_at_tpr, threshold_at_tpr


def ss(values):
    return ScoreSet(scores=np.asarray(values, dtype=np.float64))


def auroc_oracle(id_scores, ood_scores):
    """O(n^2) pair enumeration with 0.5 tie credit."""
    wins = 0.0
    for a in id_scores:
        for b in ood_scores:
            if a > b:
                wins += 1.0
            elif a == b:
                wins += 0.5
    return wins / (len(id_scores) * len(ood_scores))


# --- threshold_at_tpr ----------------------------------------------------------

def test_threshold_rank_formula():
    gamma = threshold_at_tpr(ss(np.arange(1.0, 101.0)), 0.95)
    assert gamma == 6.0
    scores = np.arange(1.0, 101.0)
    assert np.count_nonzero(scores >= gamma) / 100 == 0.95


def test_threshold_accept_all():
    assert threshold_at_tpr(ss([3.0, -1.0, 7.0]), 1.0) == -1.0


def test_threshold_constant_scores():
    gamma = threshold_at_tpr(ss([2.5] * 9), 0.95)
    assert gamma == 2.5


def test_threshold_empty():
    with pytest.raises(EmptyScores):
        threshold_at_tpr(ScoreSet(scores=np.array([])), 0.95)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=300),
       st.floats(0.01, 1.0))
@settings(max_examples=200, deadline=None)
def test_threshold_always_achieves_target(scores, target):
    s = ss(scores)
    gamma = threshold_at_tpr(s, target)
    achieved = np.count_nonzero(s.scores >= gamma) / len(s)
    assert achieved >= target


# --- fpr_at_tpr -----------------------------------------------------------------

def test_fpr_hand_case():
    fpr = fpr_at_tpr(ss(np.arange(1.0, 101.0)), ss([4.0, 6.0]), 0.95)
    assert fpr == 0.5


def test_fpr_perfect_separation():
    fpr = fpr_at_tpr(ss([10.0, 11.0, 12.0]), ss([1.0, 2.0]), 0.95)
    assert fpr == 0.0


def test_fpr_identical_distributions_near_tpr():
    scores = np.arange(1.0, 101.0)
    fpr = fpr_at_tpr(ss(scores), ss(scores), 0.95)
    tpr = np.count_nonzero(scores >= threshold_at_tpr(ss(scores), 0.95)) / 100
    assert abs(fpr - tpr) <= 1.0 / 100


def test_fpr_monotone_in_ood_scores():
    rng = np.random.default_rng(1)
    id_s = ss(rng.normal(size=200))
    ood = rng.normal(size=150)
    base = fpr_at_tpr(id_s, ss(ood), 0.95)
    lowered = fpr_at_tpr(id_s, ss(ood - 0.5), 0.95)
    assert lowered <= base


# --- auroc -----------------------------------------------------------------------

def test_auroc_perfect_separation():
    assert auroc(ss([1.0, 2.0, 3.0]), ss([0.0, 0.5])) == 1.0


def test_auroc_identical_multisets():
    v = [0.3, 0.3, 1.0, 2.0]
    assert auroc(ss(v), ss(v)) == 0.5


def test_auroc_hand_case():
    assert auroc(ss([1.0, 2.0, 3.0, 4.0]), ss([0.0, 2.5])) == 0.75


@given(st.integers(1, 60), st.integers(1, 60), st.integers(0, 100_000))
@settings(max_examples=300, deadline=None)
def test_auroc_matches_quadratic_oracle(n, m, seed):
    rng = np.random.default_rng(seed)
    # integer-ish scores make ties frequent
    a = np.round(rng.normal(size=n) * 3.0)
    b = np.round(rng.normal(size=m) * 3.0)
    fast = auroc(ss(a), ss(b))
    slow = auroc_oracle(a, b)
    assert abs(fast - slow) <= 1e-12
    assert 0.0 <= fast <= 1.0


@given(st.integers(1, 80), st.integers(1, 80), st.integers(0, 100_000))
@settings(max_examples=300, deadline=None)
def test_auroc_tie_symmetry_exact(n, m, seed):
    rng = np.random.default_rng(seed)
    a = np.round(rng.normal(size=n) * 2.0) / 2.0
    b = np.round(rng.normal(size=m) * 2.0) / 2.0
    assert auroc(ss(a), ss(b)) + auroc(ss(b), ss(a)) == 1.0


def test_auroc_invariant_under_monotone_transform():
    rng = np.random.default_rng(2)
    a = rng.normal(size=50)
    b = rng.normal(size=70)
    base = auroc(ss(a), ss(b))
    assert auroc(ss(np.exp(a)), ss(np.exp(b))) == base
    assert auroc(ss(3.0 * a + 1.0), ss(3.0 * b + 1.0)) == base


def test_auroc_empty_raises():
    with pytest.raises(EmptyScores):
        auroc(ss([]), ss([1.0]))


# --- decide -----------------------------------------------------------------------

def test_decide_boundary_non_strict():
    assert decide(1.0, 1.0) == "ID"
    assert decide(1.0 + 1e-12, 1.0) == "ID"
    assert decide(1.0 - 1e-12, 1.0) == "OOD"


# --- evaluate ---------------------------------------------------------------------

def test_evaluate_perfect_separation():
    rep = evaluate(ss(np.arange(10.0, 30.0)), ss(np.arange(-10.0, 0.0)), 0.95)
    assert rep.fpr95 == 0.0
    assert rep.auroc == 1.0
    assert rep.n_id == 20 and rep.n_ood == 10
    assert rep.tpr_achieved >= 0.95


def test_evaluate_identical_distributions():
    rng = np.random.default_rng(3)
    v = rng.normal(size=1000)
    rep = evaluate(ss(v), ss(v), 0.95)
    assert rep.auroc == 0.5


def test_evaluate_matches_oracle_on_synthetic_scores():
    rng = np.random.default_rng(4)
    a = rng.normal(loc=1.0, size=150)
    b = rng.normal(loc=0.0, size=120)
    rep = evaluate(ss(a), ss(b), 0.95)
    assert abs(rep.auroc - auroc_oracle(a, b)) <= 1e-12
    gamma = threshold_at_tpr(ss(a), 0.95)
    assert rep.gamma == gamma
    assert rep.fpr95 == np.count_nonzero(b >= gamma) / len(b)
