"""Label space, instances, datasets and experiment configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

# Every held-out class collapses onto this single sentinel.
UNKNOWN = -1

BASELINES = ("static", "incremental", "sosr")

# sub-stream keys under a run seed
RNG_PARTITION, RNG_SPLIT, RNG_WARMUP = 1, 2, 3


class InfeasibleBetaError(ValueError):
    """Raised when a missing-class ratio leaves fewer than two known classes."""


def is_known(label: int) -> bool:
    return label != UNKNOWN


def format_label(label: int) -> str:
    return "UC" if label == UNKNOWN else str(int(label))


def parse_label(token: str) -> int:
    token = token.strip()
    return UNKNOWN if token == "UC" else int(token)


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for a named sub-stream of ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.default_rng(ss)


def derive_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class Instance:
    features: np.ndarray
    label: int
    index: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.features)):
            raise ValueError(f"instance {self.index} has non-finite features")


@dataclass
class Dataset:
    """Feature matrix ``X`` (n, d) with integer labels ``y``; ``UNKNOWN`` marks unknowns."""

    X: np.ndarray
    y: np.ndarray
    n_classes: int
    name: str = ""
    class_names: tuple = ()

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        if len(self.X) != len(self.y):
            raise ValueError("X and y lengths differ")
        if not np.all(np.isfinite(self.X)):
            raise ValueError(f"dataset {self.name!r} contains non-finite features")
        known = self.y[self.y != UNKNOWN]
        if known.size and (known.min() < 0 or known.max() >= self.n_classes):
            raise ValueError(f"dataset {self.name!r} has labels outside [0, {self.n_classes})")

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return len(self.y)

    def instances(self) -> Iterator[Instance]:
        for t, (x, label) in enumerate(zip(self.X, self.y)):
            yield Instance(x, int(label), t)


@dataclass
class ExperimentConfig:
    beta: float
    seed: int
    baseline: str = "sosr"
    learning_rate: float = 0.01
    warmup_epochs: int = 1
    # None selects the post-hoc Youden threshold.
    gamma_h: Optional[float] = None
    consolidation: object = None
    kmeans_max_iters: int = 100
    kmeans_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.baseline not in BASELINES:
            raise ValueError(f"unknown baseline {self.baseline!r}; choose from {BASELINES}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.warmup_epochs < 1:
            raise ValueError("warmup_epochs must be >= 1")
        if self.gamma_h is not None and not 0.0 < self.gamma_h <= 1.0:
            raise ValueError(f"gamma_h must lie in (0, 1], got {self.gamma_h}")

    def echo(self) -> dict:
        return {
            "beta": self.beta,
            "seed": self.seed,
            "baseline": self.baseline,
            "learning_rate": self.learning_rate,
            "warmup_epochs": self.warmup_epochs,
            "gamma_h": self.gamma_h,
        }


def n_unknown_classes(n_classes: int, beta: float) -> int:
    return max(1, math.floor(beta * n_classes + 0.5))


def label_space_partition(n_classes: int, beta: float, rng: np.random.Generator):
    """Split class ids into known and unknown sets.

    The unknown count is ``beta * n_classes`` rounded half-up, never below one.
    Raises ``ValueError`` when fewer than two known classes would remain.
    """
    if n_classes < 3:
        raise ValueError(f"need at least 3 classes, got {n_classes}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    n_uc = n_unknown_classes(n_classes, beta)
    if n_classes - n_uc < 2:
        raise InfeasibleBetaError(
            f"beta={beta} leaves {n_classes - n_uc} known class(es) out of {n_classes}; need >= 2"
        )
    uc = rng.choice(n_classes, size=n_uc, replace=False)
    uc_ids = set(int(c) for c in uc)
    kc_ids = set(range(n_classes)) - uc_ids
    return kc_ids, uc_ids


def relabel_map(kc_ids) -> dict:
    """Dense re-indexing of known classes, ascending by original id."""
    return {orig: new for new, orig in enumerate(sorted(kc_ids))}

