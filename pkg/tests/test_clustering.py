import numpy as np
import pytest

from depcon.clustering import (
    adjusted_rand_index,
    calinski_harabasz,
    kernel_kmeans,
    lloyd_kmeans,
    select_k,
    silhouette_from_distances,
    silhouette_score,
    variance_ratio_criterion,
)
from depcon.errors import (
    DegenerateLabelsError,
    KTooLargeError,
    LengthMismatchError,
    NotSquareError,
    OutOfRangeError,
)


def ideal_block_gram(sizes):
    """within-block kappa 1, cross-block -1 (rank-deficient but PSD for 2 blocks)."""
    labels = np.concatenate([[i] * s for i, s in enumerate(sizes)])
    gram = np.where(labels[:, None] == labels[None, :], 1.0, -1.0)
    return gram, labels


def separated_gram(sizes, within=0.9, cross=0.1):
    labels = np.concatenate([[i] * s for i, s in enumerate(sizes)])
    gram = np.where(labels[:, None] == labels[None, :], within, cross)
    np.fill_diagonal(gram, 1.0)
    return gram, labels


# ---------------------------------------------------------------- kernel k-means


def test_ideal_two_blocks_perfect_split():
    gram, truth = ideal_block_gram([12, 8])
    result = kernel_kmeans(gram, 2, seed=0)
    assert adjusted_rand_index(truth, result.labels) == 1.0
    assert result.converged


def test_k_equal_n_zero_objective():
    rng = np.random.default_rng(0)
    from depcon.kernel import gram_matrix

    gram = gram_matrix(rng.standard_normal((6, 3))).values
    result = kernel_kmeans(gram, 6, seed=1)
    assert result.objective == pytest.approx(0.0, abs=1e-9)
    assert sorted(result.labels.tolist()) == list(range(6))


def test_kernel_kmeans_linear_gram_matches_lloyd():
    # with K = X X^T, kernel k-means follows Lloyd's exactly from a shared start;
    # instances where an empty-cluster repair fires are excluded (the two repair
    # policies use their native geometries and may legitimately pick different points)
    rng = np.random.default_rng(1)
    clean = 0
    attempts = 0
    while clean < 20:
        attempts += 1
        assert attempts < 200
        n, m, k = 24, 2, 3
        points = rng.standard_normal((n, m)) + 3.0 * rng.integers(0, k, (n, 1))
        seeds = rng.choice(n, size=k, replace=False)
        init = np.argmin(
            ((points[:, None, :] - points[seeds][None, :, :]) ** 2).sum(axis=2), axis=1
        )
        if np.unique(init).size < k:
            continue
        kernel_result = kernel_kmeans(points @ points.T, k, init_labels=init, max_iter=60)
        lloyd_result = lloyd_kmeans(points, k, init_labels=init, max_iter=60)
        if kernel_result.repairs or lloyd_result.repairs:
            continue
        clean += 1
        assert np.array_equal(kernel_result.labels, lloyd_result.labels)
        assert kernel_result.objective == pytest.approx(lloyd_result.objective, rel=1e-9)


def test_objective_nonincreasing_trace():
    gram, _ = separated_gram([10, 10, 10], within=0.8, cross=0.2)
    rng = np.random.default_rng(2)
    noise = 0.05 * rng.standard_normal(gram.shape)
    noisy = gram + (noise + noise.T) / 2
    np.fill_diagonal(noisy, 1.0)
    result = kernel_kmeans(noisy, 3, seed=3, restarts=4)
    trace = result.objective_trace
    assert all(a >= b - 1e-9 for a, b in zip(trace, trace[1:]))


def test_determinism_and_restart_selection():
    gram, _ = separated_gram([8, 8], within=0.7, cross=0.3)
    a = kernel_kmeans(gram, 2, seed=42)
    b = kernel_kmeans(gram, 2, seed=42)
    assert np.array_equal(a.labels, b.labels) and a.objective == b.objective


def test_k_too_large_and_too_small():
    gram, _ = ideal_block_gram([4, 4])
    with pytest.raises(KTooLargeError):
        kernel_kmeans(gram, 9)
    with pytest.raises(OutOfRangeError):
        kernel_kmeans(gram, 1)
    with pytest.raises(NotSquareError):
        kernel_kmeans(np.zeros((3, 4)), 2)


# ---------------------------------------------------------------- criteria


def test_vrc_maximal_at_true_k():
    gram, truth = separated_gram([10, 10, 10, 10], within=0.95, cross=0.05)
    scores = {}
    for k in range(2, 9):
        labels = kernel_kmeans(gram, k, seed=5).labels
        scores[k] = variance_ratio_criterion(gram, labels)
    assert max(scores, key=scores.get) == 4


def test_vrc_degenerate_infinite():
    gram = np.ones((6, 6))
    labels = np.array([0, 0, 0, 1, 1, 1])
    assert variance_ratio_criterion(gram, labels) == np.inf


def test_vrc_matches_explicit_calinski_harabasz_for_linear_kernel():
    rng = np.random.default_rng(6)
    points = rng.standard_normal((30, 4))
    labels = rng.integers(0, 3, 30)
    while np.unique(labels).size < 3:
        labels = rng.integers(0, 3, 30)
    kernel_value = variance_ratio_criterion(points @ points.T, labels)
    explicit = calinski_harabasz(points, labels)
    assert kernel_value == pytest.approx(explicit, rel=1e-6)


def test_vrc_label_validation():
    gram, _ = ideal_block_gram([4, 4])
    with pytest.raises(DegenerateLabelsError):
        variance_ratio_criterion(gram, np.zeros(8, dtype=int))
    with pytest.raises(LengthMismatchError):
        variance_ratio_criterion(gram, np.zeros(5, dtype=int))


def test_silhouette_ideal_blocks():
    gram, truth = ideal_block_gram([10, 10])
    assert silhouette_score(gram, truth) == pytest.approx(1.0, abs=1e-6)


def test_silhouette_random_labels_near_zero():
    rng = np.random.default_rng(7)
    from depcon.kernel import gram_matrix

    gram = gram_matrix(rng.standard_normal((60, 3)))
    labels = rng.integers(0, 3, 60)
    while np.unique(labels).size < 3:
        labels = rng.integers(0, 3, 60)
    assert abs(silhouette_score(gram, labels)) < 0.1


def test_silhouette_singletons_contribute_zero():
    dist = np.array(
        [
            [0.0, 1.0, 4.0],
            [1.0, 0.0, 4.0],
            [4.0, 4.0, 0.0],
        ]
    )
    labels = np.array([0, 0, 1])
    # singleton sample contributes 0: s = (s_0 + s_1 + 0) / 3
    s0 = (4.0 - 1.0) / 4.0
    assert silhouette_from_distances(dist, labels) == pytest.approx((2 * s0) / 3)


def test_silhouette_label_permutation_invariance():
    gram, truth = separated_gram([8, 6, 5], within=0.8, cross=0.2)
    relabeled = (truth + 1) % 3
    assert silhouette_score(gram, truth) == pytest.approx(silhouette_score(gram, relabeled))
    assert variance_ratio_criterion(gram, truth) == pytest.approx(
        variance_ratio_criterion(gram, relabeled)
    )


# ---------------------------------------------------------------- select_k


def test_select_k_singleton_range():
    gram, _ = separated_gram([10, 10], within=0.9, cross=0.1)
    result = select_k(gram, [3], "vrc", seed=0)
    assert result.best_k == 3 and list(result.scores) == [3]


def test_select_k_finds_true_k_on_separated_gram():
    gram, _ = separated_gram([12, 12, 12], within=0.95, cross=0.05)
    result = select_k(gram, range(2, 8), "vrc", seed=1)
    assert result.best_k == 3
    silhouette_result = select_k(gram, range(2, 8), "silhouette", seed=1)
    assert silhouette_result.best_k == 3


def test_select_k_objective_nonincreasing_in_k():
    gram, _ = separated_gram([12, 12, 12], within=0.9, cross=0.1)
    result = select_k(gram, range(2, 7), "vrc", seed=2, restarts=8)
    objectives = [result.assignments[k].objective for k in sorted(result.assignments)]
    assert all(a >= b - 1e-9 for a, b in zip(objectives, objectives[1:]))


def test_select_k_range_validation():
    gram, _ = ideal_block_gram([4, 4])
    with pytest.raises(OutOfRangeError):
        select_k(gram, range(2, 20), "vrc")
    with pytest.raises(OutOfRangeError):
        select_k(gram, [3], "unknown-criterion")


# ---------------------------------------------------------------- ARI


def test_ari_identical_and_relabeled():
    labels = np.array([0, 0, 1, 1, 2, 2])
    assert adjusted_rand_index(labels, labels) == 1.0
    assert adjusted_rand_index(labels, (labels + 1) % 3) == 1.0


def test_ari_hand_computed_example():
    a = np.array([0, 0, 0, 1, 1, 1])
    b = np.array([0, 0, 1, 1, 2, 2])
    # contingency [[2,1,0],[0,1,2]]: index 2, expected 1.2, max 4.5 -> 0.8/3.3
    assert adjusted_rand_index(a, b) == pytest.approx(8.0 / 33.0)


def test_ari_against_reference_implementation():
    sklearn_metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(8)
    for _ in range(25):
        a = rng.integers(0, 4, 30)
        b = rng.integers(0, 3, 30)
        assert adjusted_rand_index(a, b) == pytest.approx(
            sklearn_metrics.adjusted_rand_score(a, b), abs=1e-12
        )


def test_ari_length_mismatch():
    with pytest.raises(LengthMismatchError):
        adjusted_rand_index([0, 1], [0, 1, 2])
