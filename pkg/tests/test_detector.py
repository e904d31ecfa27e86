import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from streamosr.clustering import ClusterState
from streamosr.detector import entropy, is_unknown, pseudo_probabilities, score


def test_equidistant_is_uniform():
    s = ClusterState([[1, 0], [-1, 0], [0, 1], [0, -1]], [1] * 4)
    np.testing.assert_allclose(pseudo_probabilities([0, 0], s), 0.25)
    assert score([0, 0], s).entropy == pytest.approx(1.0, abs=1e-12)


def test_at_centroid_is_one_hot():
    s = ClusterState([[0, 0], [1, 1], [2, 0]], [1] * 3)
    np.testing.assert_array_equal(pseudo_probabilities([1, 1], s), [0, 1, 0])
    assert score([1, 1], s).entropy == 0.0


def test_coinciding_centroids_share_mass():
    s = ClusterState([[1, 1], [1, 1], [5, 5]], [1] * 3)
    np.testing.assert_array_equal(pseudo_probabilities([1, 1], s), [0.5, 0.5, 0])


def test_inverse_square_example():
    s = ClusterState([[0, 0], [3, 0]], [1, 1])
    # distances (1, 2) -> weights (1, 1/4)
    np.testing.assert_allclose(pseudo_probabilities([1, 0], s), [0.8, 0.2], atol=1e-15)


def test_entropy_examples():
    oracle = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))
    assert entropy([0.8, 0.2], 2) == pytest.approx(oracle, abs=1e-12)
    assert entropy([0.8, 0.2], 2) == pytest.approx(0.72193, abs=1e-4)
    assert entropy([0, 0, 1, 0], 4) == 0.0
    with pytest.raises(ValueError):
        entropy([1.0], 1)


@pytest.mark.parametrize("M", range(2, 33))
def test_uniform_entropy_is_one(M):
    assert abs(entropy(np.full(M, 1 / M), M) - 1.0) < 1e-12


def test_is_unknown_boundary():
    assert not is_unknown(0.3, 0.5)
    assert is_unknown(0.5, 0.5)
    assert is_unknown(1.0, 1.0)


def _random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, (4, 3), elements=st.floats(-10, 10)),
    arrays(np.float64, 3, elements=st.floats(-10, 10)),
    st.floats(0.1, 10),
    st.integers(0, 2**31),
)
def test_pseudo_probs_similarity_invariant(C, x, scale, seed):
    if np.min(np.linalg.norm(C - x, axis=1)) < 1e-3:
        return
    rng = np.random.default_rng(seed)
    R, t = _random_rotation(rng, 3), rng.normal(0, 5, 3)
    p = pseudo_probabilities(x, ClusterState(C, [1] * 4))
    q = pseudo_probabilities(scale * (x @ R.T) + t, ClusterState(scale * (C @ R.T) + t, [1] * 4))
    np.testing.assert_allclose(p, q, rtol=1e-7, atol=1e-10)
    assert abs(p.sum() - 1) < 1e-9


def test_entropy_approaches_zero_near_centroid():
    s = ClusterState([[0, 0], [4, 0], [0, 4]], [1] * 3)
    hs = [score([eps, 0], s).entropy for eps in (1.0, 1e-2, 1e-4, 1e-6)]
    assert all(a > b for a, b in zip(hs, hs[1:]))
    assert hs[-1] < 1e-9


def test_two_cluster_segment_peak_at_midpoint():
    s = ClusterState([[0, 0], [2, 0]], [1, 1])
    grid = np.linspace(0.01, 1.0, 100)
    left = [score([u, 0], s).entropy for u in grid]
    assert np.all(np.diff(left) > 0)
    assert left[-1] == pytest.approx(1.0)
    right = [score([2 - u, 0], s).entropy for u in grid]
    np.testing.assert_allclose(left, right, atol=1e-12)
