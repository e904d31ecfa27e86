"""Test-then-train stream runner for the static, incremental and sOSR baselines."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .classifier import SoftmaxClassifier
from .clustering import ClusterState, warmup_init
from .core import RNG_WARMUP, UNKNOWN, Dataset, ExperimentConfig, child_rng, format_label, parse_label
from .detector import entropy, probs_from_sq_distances


@dataclass
class Models:
    classifier: SoftmaxClassifier
    clusters: Optional[ClusterState] = None

    def copy(self) -> "Models":
        return Models(self.classifier.copy(), None if self.clusters is None else self.clusters.copy())


@dataclass
class BufferThreshold:
    """Reference consolidation policy: promote buffered unknowns to a new class.

    Instances flagged unknown are kept in a FIFO buffer of ``capacity``; once
    ``min_count`` are held they become a new class, learned by the classifier
    and seeded as a centroid at the buffer mean.
    """

    capacity: int = 100
    min_count: int = 50
    buffer: list = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.min_count <= self.capacity:
            raise ValueError("need 1 <= min_count <= capacity")

    def observe(self, x, models: Models) -> Optional[int]:
        self.buffer.append(np.array(x, dtype=np.float64))
        if len(self.buffer) > self.capacity:
            self.buffer.pop(0)
        if len(self.buffer) < self.min_count:
            return None
        clf = models.classifier
        new_label = max(c for c in clf.class_registry if c != UNKNOWN) + 1
        clf.add_class(new_label)
        for xb in self.buffer:
            clf.learn(xb, new_label)
        if models.clusters is not None:
            models.clusters.add_centroid(np.mean(self.buffer, axis=0), count=len(self.buffer))
        self.buffer = []
        return new_label


@dataclass
class RunRecord:
    true_label: np.ndarray
    closed_pred: np.ndarray
    entropy: Optional[np.ndarray] = None
    # filled only when a fixed threshold was used online
    predictions: Optional[np.ndarray] = None
    clusters: Optional[ClusterState] = None
    config: Optional[dict] = None

    def __len__(self):
        return len(self.true_label)

    @property
    def t(self):
        return np.arange(len(self.true_label))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "true_label", "closed_pred", "entropy"])
            for t in range(len(self)):
                h = "" if self.entropy is None else repr(float(self.entropy[t]))
                w.writerow([t, format_label(self.true_label[t]), format_label(self.closed_pred[t]), h])

    @classmethod
    def from_csv(cls, path) -> "RunRecord":
        truth, closed, ent = [], [], []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                truth.append(parse_label(row["true_label"]))
                closed.append(parse_label(row["closed_pred"]))
                ent.append(row["entropy"])
        entropies = None
        if ent and all(e != "" for e in ent):
            entropies = np.array([float(e) for e in ent])
        return cls(np.array(truth, dtype=np.int64), np.array(closed, dtype=np.int64), entropies)


def warm_up(train: Dataset, config: ExperimentConfig, rng=None, with_clusters=True) -> Models:
    """Fit the classifier (shuffled SGD passes) and seed k = |KC| centroids on ``train``."""
    if len(train) == 0:
        raise ValueError("warm-up partition is empty")
    if np.any(train.y == UNKNOWN):
        raise ValueError("warm-up partition must contain known classes only")
    k = train.n_classes
    missing = sorted(set(range(k)) - set(np.unique(train.y).tolist()))
    if missing:
        raise ValueError(f"known classes {missing} have no warm-up instances")
    if k < 2:
        raise ValueError("need at least two known classes")
    if rng is None:
        rng = child_rng(config.seed, RNG_WARMUP)

    clf = SoftmaxClassifier(range(k), train.d, config.learning_rate)
    X, y = train.X, train.y
    for _ in range(config.warmup_epochs):
        for i in rng.permutation(len(y)):
            clf.learn(X[i], int(y[i]))
    clusters = None
    if with_clusters:
        clusters = warmup_init(X, k, rng, config.kmeans_max_iters, config.kmeans_tol)
    return Models(clf, clusters)


def process_instance_sosr(models: Models, x, gamma_h=None, policy=None):
    """Score ``x`` and predict it.

    Returns ``(predicted, closed_set_prediction, entropy)``. ``predicted`` is
    None when no threshold is given; the caller resolves it post hoc.
    """
    sq = models.clusters.sq_distances(x)
    h = entropy(probs_from_sq_distances(sq), models.clusters.M)
    closed = models.classifier.predict(x)
    if gamma_h is None:
        return None, closed, h
    if h < gamma_h:
        return closed, closed, h
    if policy is not None:
        new_label = policy.observe(x, models)
        if new_label is not None:
            return new_label, closed, h
    return UNKNOWN, closed, h


def verify_and_update(models: Models, x, true_label, baseline, detector_verdict_known=True):
    """Reveal the true label and update the models the baseline owns.

    Clustering follows the verified label rather than the detector verdict,
    which keeps sOSR model evolution independent of the threshold.
    """
    if baseline == "static":
        return
    clf = models.classifier
    if baseline == "incremental":
        if true_label == UNKNOWN and UNKNOWN not in clf.class_registry:
            clf.add_class(UNKNOWN)
        clf.learn(x, true_label)
    elif baseline == "sosr":
        if true_label != UNKNOWN:
            clf.learn(x, true_label)
            models.clusters.update(x)
    else:
        raise ValueError(f"unknown baseline {baseline!r}")


def run_stream(train: Dataset, stream: Dataset, config: ExperimentConfig, models: Models = None) -> RunRecord:
    """Warm up, then predict-log-update every stream instance in order.

    A pre-warmed ``models`` (from :func:`warm_up` with the same config) may be
    passed to share one warm-up between baselines; it is copied, not mutated.
    """
    if len(stream) == 0:
        raise ValueError("stream is empty")
    baseline = config.baseline
    sosr = baseline == "sosr"
    if models is None:
        models = warm_up(train, config, with_clusters=sosr)
    else:
        models = models.copy()
    if sosr and models.clusters is None:
        raise ValueError("sOSR needs warm-up centroids")
    clf = models.classifier
    gamma_h = config.gamma_h
    policy = config.consolidation if sosr else None

    n = len(stream)
    X, y = stream.X, stream.y
    closed_pred = np.empty(n, dtype=np.int64)
    ent = np.empty(n) if sosr else None
    preds = np.empty(n, dtype=np.int64) if (sosr and gamma_h is not None) else None

    for t in range(n):
        x, label = X[t], int(y[t])
        if sosr:
            pred, closed, h = process_instance_sosr(models, x, gamma_h, policy)
            ent[t] = h
            if preds is not None:
                preds[t] = pred
            closed_pred[t] = closed
        else:
            closed_pred[t] = clf.predict(x)
        verify_and_update(models, x, label, baseline)

    return RunRecord(
        true_label=y.copy(),
        closed_pred=closed_pred,
        entropy=ent,
        predictions=preds,
        clusters=models.clusters,
        config=config.echo(),
    )
