"""Incremental k-means with k-means++ warm-up and the Davies-Bouldin index."""

from __future__ import annotations

import warnings

import numpy as np


def _sq_dists(X, C):
    diff = X[:, None, :] - C[None, :, :]
    return np.einsum("nmd,nmd->nm", diff, diff)


def kmeans_pp_seed(X, k, rng):
    n = len(X)
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            # only reachable with duplicate points; pick any point not yet used
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centers[i] = X[idx]
        closest = np.minimum(closest, ((X - centers[i]) ** 2).sum(axis=1))
    return centers


def _fill_empty(X, C, labels, k):
    """Move the point farthest from its centroid into each empty cluster."""
    counts = np.bincount(labels, minlength=k)
    changed = False
    for j in np.flatnonzero(counts == 0):
        own = ((X - C[labels]) ** 2).sum(axis=1)
        own[counts[labels] <= 1] = -1.0  # never empty a singleton
        far = int(np.argmax(own))
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] = 1
        C[j] = X[far]
        changed = True
    return changed


def _means(X, labels, k):
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    counts = np.bincount(labels, minlength=k)
    return sums / counts[:, None], counts


class ClusterState:
    """Fixed-size set of centroids updated one point at a time by running means."""

    def __init__(self, centroids, counts):
        self.centroids = np.array(centroids, dtype=np.float64, ndmin=2)
        self.counts = np.array(counts, dtype=np.int64)
        if len(self.centroids) != len(self.counts) or len(self.counts) < 1:
            raise ValueError("centroids and counts must have equal, nonzero length")

    @property
    def M(self) -> int:
        return len(self.centroids)

    @property
    def d(self) -> int:
        return self.centroids.shape[1]

    def copy(self) -> "ClusterState":
        return ClusterState(self.centroids.copy(), self.counts.copy())

    def sq_distances(self, x):
        diff = self.centroids - x
        return np.einsum("md,md->m", diff, diff)

    def assign(self, x) -> int:
        # argmin returns the first minimum, i.e. the lowest index on ties
        return int(np.argmin(self.sq_distances(np.asarray(x, dtype=np.float64))))

    def assign_many(self, X):
        return np.argmin(_sq_dists(np.asarray(X, dtype=np.float64), self.centroids), axis=1)

    def update(self, x, m=None) -> int:
        """Absorb ``x`` into its nearest cluster and return that cluster's index."""
        x = np.asarray(x, dtype=np.float64)
        if m is None:
            m = self.assign(x)
        self.counts[m] += 1
        self.centroids[m] += (x - self.centroids[m]) / self.counts[m]
        return m

    def add_centroid(self, center, count=1) -> int:
        self.centroids = np.vstack([self.centroids, np.asarray(center, dtype=np.float64)])
        self.counts = np.append(self.counts, int(count))
        return self.M - 1


def warmup_init(points, k, rng, max_iters=100, tol=1e-6) -> ClusterState:
    """k-means++ seeding followed by Lloyd iterations.

    Stops once no centroid moves by ``tol`` or more, or after ``max_iters``
    rounds. Empty clusters are re-seeded at the point farthest from its own
    centroid, so every returned count is at least one.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2 or k < 1 or len(X) < k:
        raise ValueError(f"need at least k={k} points of shape (n, d)")
    if len(np.unique(X, axis=0)) < k:
        raise ValueError(f"fewer than k={k} distinct points; warm-up is degenerate")

    C = kmeans_pp_seed(X, k, rng)
    for _ in range(max_iters):
        labels = np.argmin(_sq_dists(X, C), axis=1)
        _fill_empty(X, C, labels, k)
        new_C, _ = _means(X, labels, k)
        shift = np.sqrt(((new_C - C) ** 2).sum(axis=1)).max()
        C = new_C
        if shift < tol:
            break

    labels = np.argmin(_sq_dists(X, C), axis=1)
    if _fill_empty(X, C, labels, k):
        C, _ = _means(X, labels, k)
    counts = np.bincount(labels, minlength=k)
    return ClusterState(C, counts)


def davies_bouldin(state: ClusterState, instances, return_empty=False):
    """Davies-Bouldin index of ``instances`` assigned to the current centroids.

    Clusters that receive no instance are left out of the average (a warning
    names them). With ``return_empty=True`` the list of those indices is
    returned alongside the value.
    """
    if state.M < 2:
        raise ValueError("Davies-Bouldin index is undefined for a single cluster")
    X = np.asarray(instances, dtype=np.float64)
    C = state.centroids
    labels = state.assign_many(X)
    counts = np.bincount(labels, minlength=state.M)
    spread = np.zeros(state.M)
    dist_to_own = np.sqrt(((X - C[labels]) ** 2).sum(axis=1))
    np.add.at(spread, labels, dist_to_own)
    live = np.flatnonzero(counts > 0)
    empty = [int(m) for m in np.flatnonzero(counts == 0)]
    if empty:
        warnings.warn(f"clusters {empty} received no instances; excluded from Davies-Bouldin")
    if len(live) < 2:
        value = float("nan")
    else:
        S = spread[live] / counts[live]
        Cl = C[live]
        sep = np.sqrt(_sq_dists(Cl, Cl))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (S[:, None] + S[None, :]) / sep
        ratio[np.isnan(ratio)] = np.inf  # coincident centroids
        np.fill_diagonal(ratio, -np.inf)
        value = float(ratio.max(axis=1).mean())
    return (value, empty) if return_empty else value
