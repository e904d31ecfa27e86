"""Open-set scores, ROC/Youden threshold selection, Wilcoxon test and aggregation."""

from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .clustering import davies_bouldin
from .core import UNKNOWN

SCORES = ("kc_acc", "uc_acc", "open_f1", "auroc", "db_index")
TESTED_SCORES = ("kc_acc", "uc_acc", "open_f1")
ALPHA = 0.05


@dataclass
class MetricsReport:
    kc_acc: Optional[float]
    uc_acc: Optional[float]
    open_f1: float
    n_kc: int
    n_uc: int
    auroc: Optional[float] = None
    chosen_threshold: Optional[float] = None
    db_index: Optional[float] = None
    db_empty_clusters: Optional[int] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def resolve_predictions(record, threshold=None):
    """Final labels for every row of ``record``.

    Rows with entropy ``>= threshold`` become ``UNKNOWN``; the rest keep the
    closed-set prediction. Records without entropies pass through unchanged.
    """
    if record.entropy is None:
        if threshold is not None:
            raise ValueError("threshold given for a record without entropy scores")
        return np.asarray(record.closed_pred)
    if threshold is None:
        if record.predictions is None:
            raise ValueError("sOSR record needs a threshold to resolve predictions")
        return np.asarray(record.predictions)
    return np.where(np.asarray(record.entropy) >= threshold, UNKNOWN, record.closed_pred)


def kc_uc_accuracy(truth, pred):
    """(KC accuracy, UC accuracy); either is None when its class of rows is absent."""
    truth, pred = np.asarray(truth), np.asarray(pred)
    if len(truth) == 0:
        raise ValueError("no predictions to score")
    uc = truth == UNKNOWN
    kc = ~uc
    kc_acc = float(np.mean(pred[kc] == truth[kc])) if kc.any() else None
    uc_acc = float(np.mean(pred[uc] == UNKNOWN)) if uc.any() else None
    return kc_acc, uc_acc


def open_macro_f1(truth, pred, kc_classes) -> float:
    """Macro F1 over known classes only; unknown rows still count as FP/FN."""
    truth, pred = np.asarray(truth), np.asarray(pred)
    if len(truth) == 0:
        raise ValueError("no predictions to score")
    f1s = []
    for k in kc_classes:
        tp = np.sum((truth == k) & (pred == k))
        fp = np.sum((truth != k) & (pred == k))
        fn = np.sum((truth == k) & (pred != k))
        denom = 2 * tp + fp + fn
        f1s.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(f1s))


@dataclass
class RocResult:
    auroc: float
    best_threshold: float
    best_j: float
    thresholds: np.ndarray
    tpr: np.ndarray
    fpr: np.ndarray


def candidate_thresholds(scores):
    """Midpoints between consecutive distinct scores plus one sentinel on each side."""
    u = np.unique(np.asarray(scores, dtype=np.float64))
    mids = (u[:-1] + u[1:]) / 2
    # adjacent floats can round the midpoint onto the lower score
    mids = np.where(mids > u[:-1], mids, u[1:])
    return np.concatenate([[u[0] - 1.0], mids, [u[-1] + 1.0]])


def roc_auc_youden(scores, is_unknown) -> RocResult:
    """ROC of ``score >= threshold`` as the unknown detector.

    AUROC is the trapezoid area under the curve, computed in integer counts so
    tied scores get exactly half credit. The chosen threshold maximises
    Youden's J = TPR - FPR, taking the lowest threshold among ties.
    """
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(is_unknown, dtype=bool)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUROC needs both unknown and known rows")
    thr = candidate_thresholds(s)
    sp, sn = np.sort(s[pos]), np.sort(s[~pos])
    tp = n_pos - np.searchsorted(sp, thr, side="left")
    fp = n_neg - np.searchsorted(sn, thr, side="left")

    # thresholds ascend, so (fp, tp) descend; walk the curve from the top end
    tp_r, fp_r = tp[::-1].tolist(), fp[::-1].tolist()
    area2 = sum((fp_r[i] - fp_r[i - 1]) * (tp_r[i] + tp_r[i - 1]) for i in range(1, len(tp_r)))
    auroc = area2 / (2 * n_pos * n_neg)

    j_scaled = tp.astype(np.int64) * n_neg - fp.astype(np.int64) * n_pos
    best = int(np.argmax(j_scaled))
    return RocResult(
        auroc=auroc,
        best_threshold=float(thr[best]),
        best_j=j_scaled[best] / (n_pos * n_neg),
        thresholds=thr,
        tpr=tp / n_pos,
        fpr=fp / n_neg,
    )


@dataclass
class WilcoxonResult:
    statistic: float  # sum of positive-difference ranks
    p_value: float
    significant: bool
    n: int
    exact: bool


def _exact_null_counts(doubled_ranks):
    """Number of sign assignments giving each value of 2 * W+."""
    counts = np.zeros(int(sum(doubled_ranks)) + 1, dtype=np.int64)
    counts[0] = 1
    top = 0
    for r in doubled_ranks:
        counts[r : top + r + 1] += counts[: top + 1].copy()
        top += r
    return counts


def wilcoxon_signed_rank(a, b, alpha=ALPHA, exact_max_n=20) -> WilcoxonResult:
    """Two-sided paired Wilcoxon signed-rank test on ``a - b``.

    Zero differences are dropped and tied magnitudes get average ranks. The
    null distribution is enumerated exactly for up to ``exact_max_n`` pairs;
    larger samples use the tie- and continuity-corrected normal approximation.
    """
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WilcoxonResult(0.0, 1.0, False, 0, True)
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())

    if n <= exact_max_n:
        doubled = np.rint(2 * ranks).astype(np.int64)
        counts = _exact_null_counts(doubled)
        obs = int(round(2 * w_plus))
        total = float(2**n)
        lower = counts[: obs + 1].sum() / total
        upper = counts[obs:].sum() / total
        p = min(1.0, 2 * min(lower, upper))
        exact = True
    else:
        mean = n * (n + 1) / 4
        _, tie_sizes = np.unique(ranks, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24 - (tie_sizes**3 - tie_sizes).sum() / 48
        dev = max(0.0, abs(w_plus - mean) - 0.5)
        p = math.erfc(dev / math.sqrt(var) / math.sqrt(2)) if var > 0 else 1.0
        p = min(1.0, p)
        exact = False
    return WilcoxonResult(w_plus, p, p < alpha, n, exact)


def evaluate(record, stream=None, kc_classes=None, threshold=None) -> MetricsReport:
    """Score one run.

    For sOSR records the AUROC is always computed; the threshold is the
    Youden-optimal one unless the run used (or the caller passes) a fixed one.
    ``stream`` supplies the features for the Davies-Bouldin index.
    """
    truth = np.asarray(record.true_label)
    if kc_classes is None:
        kc_classes = sorted(set(truth[truth != UNKNOWN].tolist()))
    auroc = db = n_empty = None
    chosen = None
    if record.entropy is not None:
        is_uc = truth == UNKNOWN
        if is_uc.any() and (~is_uc).any():
            roc = roc_auc_youden(record.entropy, is_uc)
            auroc = roc.auroc
        if threshold is not None:
            pred = resolve_predictions(record, threshold)
        elif record.predictions is not None:
            pred = np.asarray(record.predictions)
            threshold = (record.config or {}).get("gamma_h")
        else:
            if auroc is None:
                # nothing to trade off: flag no row as unknown
                threshold = float(np.max(record.entropy)) + 1.0
            else:
                threshold = roc.best_threshold
            pred = resolve_predictions(record, threshold)
        chosen = threshold
        if stream is not None and record.clusters is not None and record.clusters.M >= 2:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                db, empty = davies_bouldin(record.clusters, stream.X, return_empty=True)
            n_empty = len(empty)
    else:
        pred = resolve_predictions(record)
    kc_acc, uc_acc = kc_uc_accuracy(truth, pred)
    return MetricsReport(
        kc_acc=kc_acc,
        uc_acc=uc_acc,
        open_f1=open_macro_f1(truth, pred, kc_classes),
        n_kc=int(np.sum(truth != UNKNOWN)),
        n_uc=int(np.sum(truth == UNKNOWN)),
        auroc=auroc,
        chosen_threshold=None if chosen is None else float(chosen),
        db_index=db,
        db_empty_clusters=n_empty,
    )


def _mean_std(values):
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    if not vals:
        return None, None
    arr = np.array(vals, dtype=np.float64)
    return float(arr.mean()), float(arr.std())


def aggregate(rows, alpha=ALPHA):
    """Summarise result rows by (generator, beta, baseline).

    Each row is a mapping with ``generator, dataset, beta, baseline, seed`` and
    the score columns; rows carrying an ``error`` are skipped. Means use the
    population standard deviation. Static and incremental groups also carry
    Wilcoxon p-values and significance flags against sOSR, paired by
    ``(dataset, seed)``.
    """
    ok = [r for r in rows if not r.get("error")]
    groups = defaultdict(list)
    for r in ok:
        groups[(r["generator"], float(r["beta"]), r["baseline"])].append(r)

    summary = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], _baseline_order(k[2]))):
        gen, beta, baseline = key
        members = groups[key]
        out = {"generator": gen, "beta": beta, "baseline": baseline, "n": len(members)}
        for s in SCORES:
            out[f"{s}_mean"], out[f"{s}_std"] = _mean_std(r.get(s) for r in members)
        sosr = {(r["dataset"], r["seed"]): r for r in groups.get((gen, beta, "sosr"), [])}
        for s in TESTED_SCORES:
            out[f"{s}_p"] = out[f"{s}_sig"] = None
            if baseline == "sosr" or not sosr:
                continue
            pairs = [
                (r[s], sosr[(r["dataset"], r["seed"])][s])
                for r in members
                if (r["dataset"], r["seed"]) in sosr
                and r.get(s) is not None
                and sosr[(r["dataset"], r["seed"])].get(s) is not None
            ]
            if pairs:
                a, b = zip(*pairs)
                res = wilcoxon_signed_rank(a, b, alpha)
                out[f"{s}_p"], out[f"{s}_sig"] = res.p_value, res.significant
        summary.append(out)
    return summary


def _baseline_order(name):
    order = ("static", "incremental", "sosr")
    return order.index(name) if name in order else len(order)
