"""Cut metrics, k-means, direct and multilevel spectral partitioning."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specreduce as sr
from specreduce.aggregate import MappingOperator
from specreduce.partition import (Hierarchy, Partition, kmeans,
                                  smallest_eigenpairs)

from conftest import (complete_graph, dense_laplacian, grid_graph,
                      optimal_bipartition_theta, oracle_cut_metrics,
                      path_graph, random_connected_graph, triangle,
                      two_triangle_bridge)


# ----------------------------------------------------------------------
# cut metrics
# ----------------------------------------------------------------------
def test_partition_validation():
    with pytest.raises(sr.GraphError):
        Partition(labels=np.array([0, 0, 2]), k=3)  # cluster 1 empty


def test_components_partition_zero_cut():
    g = sr.Graph.from_edges(4, [(0, 1), (2, 3)], [1.0, 1.0])
    rep = sr.cut_metrics(g, Partition(labels=np.array([0, 0, 1, 1]), k=2))
    assert rep.edge_cut == rep.ratio_cut == rep.normalized_cut == 0.0


def test_two_triangle_bridge_values():
    g = two_triangle_bridge()
    rep = sr.cut_metrics(g, Partition(labels=np.array([0, 0, 0, 1, 1, 1]), k=2))
    assert rep.edge_cut == pytest.approx(2.0)       # bridge counted per side
    assert rep.ratio_cut == pytest.approx(2.0 / 3.0)
    assert rep.normalized_cut == pytest.approx(2.0 / 7.0)
    # and this split is optimal over all bipartitions
    assert optimal_bipartition_theta(g) == pytest.approx(2.0 / 7.0)


def test_single_cluster_all_zero():
    g = triangle()
    rep = sr.cut_metrics(g, Partition(labels=np.zeros(3, dtype=np.int64), k=1))
    assert rep.edge_cut == rep.ratio_cut == rep.normalized_cut == 0.0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_cut_metrics_match_bruteforce(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 100))
    g = random_connected_graph(rng, n)
    k = int(rng.integers(2, 6))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)
    rep = sr.cut_metrics(g, Partition(labels=labels, k=k))
    cut, rho, theta = oracle_cut_metrics(g, labels, k)
    assert rep.edge_cut == pytest.approx(cut)
    assert rep.ratio_cut == pytest.approx(rho)
    assert rep.normalized_cut == pytest.approx(theta)


# ----------------------------------------------------------------------
# k-means
# ----------------------------------------------------------------------
def test_kmeans_two_blobs():
    rng = np.random.default_rng(0)
    pts = np.vstack([rng.normal(0, 0.1, size=(6, 2)),
                     rng.normal(10, 0.1, size=(6, 2))])
    part = kmeans(pts, 2, seed=1)
    assert len(set(part.labels[:6])) == 1
    assert len(set(part.labels[6:])) == 1
    assert part.labels[0] != part.labels[6]


def test_kmeans_k_equals_n():
    pts = np.arange(5, dtype=float)[:, None]
    part = kmeans(pts, 5, seed=0)
    assert len(np.unique(part.labels)) == 5


def test_kmeans_identical_points_repair():
    pts = np.zeros((6, 2))
    part = kmeans(pts, 2, seed=0)
    assert len(np.unique(part.labels)) == 2  # repair path keeps both clusters


def test_kmeans_too_few_points():
    with pytest.raises(sr.GraphError):
        kmeans(np.zeros((2, 2)), 3)


# ----------------------------------------------------------------------
# eigensolvers
# ----------------------------------------------------------------------
@pytest.mark.parametrize("b_mode", ["identity", "degree"])
def test_smallest_eigenpairs_match_dense(rng, b_mode):
    g = random_connected_graph(rng, 30)
    vals, vecs = smallest_eigenpairs(g, 4, b_mode)
    import scipy.linalg
    b = np.eye(30) if b_mode == "identity" else np.diag(g.degrees())
    ref = scipy.linalg.eigh(dense_laplacian(g), b, eigvals_only=True)[:4]
    np.testing.assert_allclose(vals, ref, atol=1e-8)
    lap = dense_laplacian(g)
    for i in range(4):
        r = lap @ vecs[:, i] - vals[i] * (b @ vecs[:, i])
        assert np.linalg.norm(r) < 1e-6


def test_direct_partition_weak_bridge():
    g = two_triangle_bridge(bridge_w=0.01)
    part = sr.direct_spectral_partition(g, 2, cut_type="normalized", seed=0)
    rep = sr.cut_metrics(g, part)
    assert rep.normalized_cut == pytest.approx(optimal_bipartition_theta(g))


def test_direct_partition_k4_optimal():
    g = complete_graph(4)
    part = sr.direct_spectral_partition(g, 2, cut_type="normalized", seed=0)
    rep = sr.cut_metrics(g, part)
    assert rep.normalized_cut == pytest.approx(optimal_bipartition_theta(g))


def test_direct_partition_disconnected_components():
    g = sr.Graph.from_edges(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)],
                            np.ones(6))
    part = sr.direct_spectral_partition(g, 2, cut_type="ratio", seed=0)
    rep = sr.cut_metrics(g, part)
    assert rep.normalized_cut == 0.0 and rep.edge_cut == 0.0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_spectral_bipartition_within_2x_of_optimum(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 13))
    g = random_connected_graph(rng, n)
    part = sr.direct_spectral_partition(g, 2, cut_type="normalized",
                                        seed=seed % 999)
    theta = sr.cut_metrics(g, part).normalized_cut
    best = optimal_bipartition_theta(g)
    assert theta <= 2.0 * best + 1e-9


# ----------------------------------------------------------------------
# hierarchy and multilevel solver
# ----------------------------------------------------------------------
def test_hierarchy_validation():
    g = path_graph(4)
    with pytest.raises(sr.GraphError):
        Hierarchy(levels=[g, path_graph(2)], maps=[])


def test_multilevel_depth1_matches_direct(rng):
    g = random_connected_graph(rng, 20)
    hier = Hierarchy(levels=[g], maps=[])
    u = sr.multilevel_eigensolver(hier, 3, cut_type="ratio")
    vals, ref = smallest_eigenpairs(g, 3, "identity")
    # same subspace up to rotation within degenerate blocks
    angles = np.linalg.svd(u.T @ np.linalg.qr(ref)[0], compute_uv=False)
    assert np.all(angles > 1.0 - 1e-6)


def test_multilevel_grid_subspace_angle():
    g = grid_graph(16, 16)
    hier = sr.spectral_reduce(g, sr.ReduceOptions(psi=4.0, seed=0))
    assert hier.depth >= 2
    u = sr.multilevel_eigensolver(hier, 4, cut_type="ratio")
    _, ref = smallest_eigenpairs(g, 4, "identity")
    qref = np.linalg.qr(ref)[0]
    angles = np.degrees(np.arccos(np.clip(
        np.linalg.svd(u.T @ qref, compute_uv=False), 0, 1)))
    assert angles.max() <= 15.0


def test_multilevel_orthonormal_and_constant_direction():
    g = grid_graph(8, 8)
    hier = sr.spectral_reduce(g, sr.ReduceOptions(psi=4.0, seed=0))
    u = sr.multilevel_eigensolver(hier, 3, cut_type="ratio")
    np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-10)
    ones = np.ones(g.n) / np.sqrt(g.n)
    # the constant direction survives lifting and smoothing
    assert np.linalg.norm(u @ (u.T @ ones)) >= 1.0 - 1e-8


def test_multilevel_coarsest_too_small():
    g = path_graph(8)
    hier = Hierarchy(levels=[g, path_graph(2)],
                     maps=[MappingOperator(np.repeat([0, 1], 4), 2)])
    with pytest.raises(sr.GraphError):
        sr.multilevel_eigensolver(hier, 4)


def test_multilevel_partition_bridge_optimal():
    g = two_triangle_bridge()
    part, rep, timing = sr.multilevel_spectral_partition(
        g, 2, reduce_opts=sr.ReduceOptions(psi=2.0, seed=0), seed=0)
    assert rep.normalized_cut == pytest.approx(2.0 / 7.0)
    assert timing.t_total_s > 0


def test_multilevel_ratio1_matches_direct(rng):
    g = random_connected_graph(rng, 25)
    part, rep, _ = sr.multilevel_spectral_partition(
        g, 3, reduce_opts=sr.ReduceOptions(psi=1.0), seed=4)
    direct = sr.direct_spectral_partition(g, 3, cut_type="normalized", seed=4)
    drep = sr.cut_metrics(g, direct)
    assert rep == drep
