import itertools

import numpy as np
import pytest
from scipy import stats

from streamosr.core import UNKNOWN
from streamosr.framework import RunRecord
from streamosr.metrics import (
    aggregate,
    evaluate,
    kc_uc_accuracy,
    open_macro_f1,
    resolve_predictions,
    roc_auc_youden,
    wilcoxon_signed_rank,
)


def test_resolve_example():
    rec = RunRecord(np.array([0, 1, UNKNOWN, 0]), np.array([0, 1, 1, 0]), np.array([0.1, 0.3, 0.8, 0.6]))
    assert resolve_predictions(rec, 0.5).tolist() == [0, 1, UNKNOWN, UNKNOWN]


def test_accuracy_example():
    assert kc_uc_accuracy([0, 1, UNKNOWN, 0], [0, 1, 1, 0]) == (1.0, 0.0)
    assert kc_uc_accuracy([0, 0, UNKNOWN, UNKNOWN], [0, 1, UNKNOWN, 0]) == (0.5, 0.5)
    assert kc_uc_accuracy([0, 1], [0, 0]) == (0.5, None)


def test_open_f1_example():
    # class 0: tp 1 fn 1 -> 2/3; class 1: tp 1 fp 1 (the unknown) -> 2/3
    f1 = open_macro_f1([0, 0, 1, UNKNOWN], [0, UNKNOWN, 1, 1], [0, 1])
    assert f1 == pytest.approx(2 / 3)


def brute_auc(scores, pos):
    s = np.asarray(scores)
    p, n = s[pos], s[~pos]
    wins = (p[:, None] > n[None, :]).sum() + 0.5 * (p[:, None] == n[None, :]).sum()
    return wins / (len(p) * len(n))


def test_auroc_examples():
    r = roc_auc_youden([0.1, 0.4, 0.35, 0.8], np.array([0, 0, 1, 1], bool))
    assert r.auroc == 0.75
    r = roc_auc_youden([0.5] * 6, np.array([1, 0, 1, 0, 0, 1], bool))
    assert r.auroc == 0.5
    r = roc_auc_youden([0.1, 0.2, 0.9, 0.95], np.array([0, 0, 1, 1], bool))
    assert r.auroc == 1.0 and r.best_j == 1.0
    assert 0.2 < r.best_threshold <= 0.9


def test_auroc_matches_sklearn(rng):
    from sklearn.metrics import roc_auc_score

    for _ in range(50):
        n = int(rng.integers(4, 100))
        s = rng.integers(0, 8, n) / 7
        y = rng.random(n) < 0.4
        if y.all() or not y.any():
            continue
        assert roc_auc_youden(s, y).auroc == pytest.approx(roc_auc_score(y, s), abs=1e-12)


def test_youden_threshold_is_optimal(rng):
    for _ in range(30):
        s = rng.random(40)
        y = rng.random(40) < 0.5
        if y.all() or not y.any():
            continue
        r = roc_auc_youden(s, y)
        j = [np.mean(s[y] >= t) - np.mean(s[~y] >= t) for t in np.unique(np.append(s, np.inf))]
        assert r.best_j == pytest.approx(max(j), abs=1e-12)
        chosen = np.mean(s[y] >= r.best_threshold) - np.mean(s[~y] >= r.best_threshold)
        assert chosen == pytest.approx(max(j), abs=1e-12)


def enum_wilcoxon_p(d):
    d = np.asarray(d, float)
    d = d[d != 0]
    ranks = stats.rankdata(np.abs(d))
    obs = ranks[d > 0].sum()
    mean = ranks.sum() / 2
    vals = np.array([sum(r for r, s in zip(ranks, signs) if s) for signs in itertools.product([0, 1], repeat=len(d))])
    return np.mean(np.abs(vals - mean) >= abs(obs - mean) - 1e-9)


def test_wilcoxon_small_example():
    res = wilcoxon_signed_rank([2, 3, 4, 5, 6, 7], [1, 1, 1, 1, 1, 1])
    assert res.p_value == pytest.approx(0.03125, abs=1e-12)
    assert res.significant and res.exact and res.statistic == 21


def test_wilcoxon_all_zero():
    res = wilcoxon_signed_rank([1, 2], [1, 2])
    assert res.p_value == 1.0 and not res.significant


def test_wilcoxon_matches_scipy_large(rng):
    a, b = rng.normal(size=40), rng.normal(0.3, 1, 40)
    ours = wilcoxon_signed_rank(a, b)
    ref = stats.wilcoxon(a, b, correction=True, method="approx")
    assert not ours.exact
    assert ours.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_wilcoxon_calibrated_under_null():
    rng = np.random.default_rng(2024)
    rejects = sum(wilcoxon_signed_rank(rng.normal(size=15), rng.normal(size=15)).significant for _ in range(1000))
    assert abs(rejects / 1000 - 0.05) <= 0.02


def test_evaluate_modes():
    rec = RunRecord(
        np.array([0, 1, UNKNOWN, 0, UNKNOWN]),
        np.array([0, 1, 1, 0, 0]),
        np.array([0.1, 0.2, 0.9, 0.3, 0.8]),
    )
    rep = evaluate(rec, kc_classes=[0, 1])
    assert rep.auroc == 1.0 and rep.uc_acc == 1.0 and rep.kc_acc == 1.0
    assert 0.3 < rep.chosen_threshold <= 0.8
    rep = evaluate(rec, kc_classes=[0, 1], threshold=0.85)
    assert rep.uc_acc == 0.5 and rep.chosen_threshold == 0.85
    plain = RunRecord(np.array([0, UNKNOWN]), np.array([0, 0]))
    rep = evaluate(plain, kc_classes=[0])
    assert rep.uc_acc == 0.0 and rep.auroc is None


def test_aggregate_population_std():
    rows = []
    for i, (s, t) in enumerate([(0.2, 0.9), (0.4, 0.8), (0.6, 0.95)]):
        for b, v in (("static", s), ("sosr", t)):
            rows.append(dict(generator="g", dataset=f"d{i}", beta=0.1, baseline=b, seed=i, kc_acc=v, uc_acc=v, open_f1=v, auroc=None, db_index=None, error=""))
    rows.append(dict(rows[0], baseline="incremental", error="boom"))
    summ = aggregate(rows)
    static = next(r for r in summ if r["baseline"] == "static")
    assert static["kc_acc_mean"] == pytest.approx(0.4)
    assert static["kc_acc_std"] == pytest.approx(np.std([0.2, 0.4, 0.6]))
    assert static["kc_acc_p"] == pytest.approx(0.25)
    assert [r["baseline"] for r in summ] == ["static", "sosr"]
