"""Extreme generalized-eigenvalue estimators and the constrained SGD
edge-scaling loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specreduce as sr
from specreduce.scale import SgdParams
from specreduce.sparsify import Sparsifier, spanning_tree

from conftest import (oracle_pencil_eigs, path_graph, random_connected_graph,
                      star_graph, triangle)


def full_sparsifier(g):
    return Sparsifier(source=g, edge_index=np.arange(g.m),
                      tree_mask=np.ones(g.m, dtype=bool),
                      weights=g.weights.copy())


def triangle_path_tree():
    g = triangle()
    s = Sparsifier(source=g, edge_index=np.array([0, 2]),
                   tree_mask=np.ones(2, dtype=bool),
                   weights=np.array([1.0, 1.0]))
    return g, s


# ----------------------------------------------------------------------
# estimators
# ----------------------------------------------------------------------
def test_lambda_max_fixed_point():
    g = path_graph(5)
    assert sr.estimate_lambda_max(g, g) == pytest.approx(1.0)


def test_lambda_max_triangle_path():
    g, s = triangle_path_tree()
    est = sr.estimate_lambda_max(g, s, iters=10, seed=0)
    assert est == pytest.approx(3.0, abs=1e-6)


def test_lambda_max_star_own_tree():
    g = star_graph(4)
    assert sr.estimate_lambda_max(g, spanning_tree(g)) == pytest.approx(1.0)


def test_lambda_min_identical():
    d = np.array([1.0, 2.0, 1.0])
    assert sr.estimate_lambda_min(d, d) == pytest.approx(1.0)


def test_lambda_min_triangle_path():
    est = sr.estimate_lambda_min(np.array([2.0, 2.0, 2.0]),
                                 np.array([1.0, 2.0, 1.0]))
    assert est == pytest.approx(1.0)
    # dense oracle: pencil eigenvalues of triangle vs path tree are {1, 3}
    g, s = triangle_path_tree()
    vals, _ = oracle_pencil_eigs(g, s.graph)
    assert vals[0] == pytest.approx(1.0, abs=1e-12)


def test_lambda_min_homogeneous():
    d_g = np.array([2.0, 2.0, 2.0])
    d_p = np.array([1.0, 2.0, 1.0])
    assert sr.estimate_lambda_min(2 * d_g, d_p) == pytest.approx(
        2 * sr.estimate_lambda_min(d_g, d_p))


def test_lambda_min_zero_degree_rejected():
    with pytest.raises(sr.GraphError):
        sr.estimate_lambda_min(np.ones(3), np.array([1.0, 0.0, 1.0]))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_estimator_sidedness(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 40))
    g = random_connected_graph(rng, n)
    s = spanning_tree(g)
    vals, _ = oracle_pencil_eigs(g, s.graph)
    lam1_true, lamn_true = vals[0], vals[-1]
    assert sr.estimate_lambda_min(g.degrees(), s.graph.degrees()) >= lam1_true - 1e-9
    est = sr.estimate_lambda_max(g, s, iters=10, seed=seed % 10007)
    assert est <= lamn_true + 1e-9


# ----------------------------------------------------------------------
# SGD scaling
# ----------------------------------------------------------------------
def test_params_validation():
    with pytest.raises(sr.GraphError):
        SgdParams(alpha=1.0)
    with pytest.raises(sr.GraphError):
        SgdParams(eta_max=0.0)
    with pytest.raises(sr.GraphError):
        SgdParams(delta_bar=0.0)
    with pytest.raises(sr.GraphError):
        SgdParams(K_max=0)


def test_identity_subgraph_stays_bounded():
    """Scaling a subgraph equal to g keeps lambda_max pinned near 1 and the
    weights within the factor allowed by the lambda_min guard."""
    g = random_connected_graph(np.random.default_rng(3), 15)
    s = full_sparsifier(g)
    scaled, trace = sr.sgd_edge_scaling(g, s, seed=0)
    assert np.all(np.diff(trace.lam_max) <= 1e-9)
    assert trace.lam_min[-1] >= 0.5 - 1e-9
    # guard: final weighted degrees cannot exceed d_G / (lambda_1_0 * delta)
    assert np.all(scaled.weights >= g.weights - 1e-12)
    assert np.all(scaled.graph.degrees() <= g.degrees() / 0.5 + 1e-9)


def test_triangle_path_scaling_with_oracle():
    g, s = triangle_path_tree()
    params = SgdParams(delta_bar=0.5, K_max=50)
    scaled, trace = sr.sgd_edge_scaling(g, s, params=params, seed=0)
    vals, _ = oracle_pencil_eigs(g, scaled.graph)
    assert vals[-1] < 3.0 - 1e-6          # dominant eigenvalue reduced
    assert trace.lam_min[-1] >= 0.5 - 1e-9
    assert vals[0] >= 0.5 * 0.5 - 1e-9    # true lambda_1 bounded below too


def test_kmax_one_single_pass():
    g, s = triangle_path_tree()
    _, trace = sr.sgd_edge_scaling(g, s, params=SgdParams(K_max=1), seed=0)
    assert len(trace) == 1


def test_trace_csv(tmp_path):
    g, s = triangle_path_tree()
    path = tmp_path / "trace.csv"
    sr.sgd_edge_scaling(g, s, params=SgdParams(K_max=3), seed=0,
                        trace_csv=path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "k,lambda_min,lambda_max,rel_change"
    assert len(lines) >= 2


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_sgd_contract_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 40))
    g = random_connected_graph(rng, n)
    s = spanning_tree(g)
    lam1_0 = sr.estimate_lambda_min(g.degrees(), s.graph.degrees())
    scaled, trace = sr.sgd_edge_scaling(g, s, params=SgdParams(K_max=20),
                                        seed=seed % 4999)
    assert np.all(np.diff(trace.lam_max) <= 1e-9)       # non-increasing
    assert trace.lam_min[-1] >= lam1_0 * 0.5 - 1e-9     # floor
    assert np.all(scaled.weights > 0)
    # dense oracle confirms the reported trace endpoints are true eigenvalues
    vals, _ = oracle_pencil_eigs(g, scaled.graph)
    assert trace.lam_max[-1] == pytest.approx(vals[-1], rel=1e-8)
    # the guard constrains the degree-ratio estimate, which upper-bounds
    # the true smallest eigenvalue
    assert vals[0] <= trace.lam_min[-1] + 1e-9
