"""Entropy of inverse-square-distance cluster memberships as a novelty score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_DISTANCE = 1e-12


@dataclass(frozen=True)
class NoveltyScore:
    pseudo_probs: np.ndarray
    entropy: float


def probs_from_sq_distances(sq_dists):
    """Normalised ``1/d**2`` weights; coinciding centroids share all the mass."""
    sq = np.asarray(sq_dists, dtype=np.float64)
    if sq.size == 0:
        raise ValueError("no clusters to score against")
    hit = sq < ZERO_DISTANCE**2
    if hit.any():
        return hit / hit.sum()
    w = 1.0 / sq
    return w / w.sum()


def pseudo_probabilities(x, state):
    return probs_from_sq_distances(state.sq_distances(np.asarray(x, dtype=np.float64)))


def entropy(p, M=None) -> float:
    """Shannon entropy of ``p`` in base ``M`` (defaults to ``len(p)``), clamped to [0, 1]."""
    p = np.asarray(p, dtype=np.float64)
    M = len(p) if M is None else int(M)
    if M < 2:
        raise ValueError("base-M entropy needs M >= 2")
    if len(p) != M:
        raise ValueError(f"probability vector has length {len(p)}, expected {M}")
    nz = p[p > 0]
    h = -(nz * np.log(nz)).sum() / np.log(M)
    return float(min(1.0, max(0.0, h)))


def score(x, state) -> NoveltyScore:
    p = pseudo_probabilities(x, state)
    return NoveltyScore(p, entropy(p, state.M))


def is_unknown(h: float, gamma_h: float) -> bool:
    # the known branch is the strict h < gamma_h
    return h >= gamma_h
