"""End-to-end reduction pipeline: routing, level schedule, reporting and
hierarchy serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specreduce as sr
from specreduce.graph import density, is_connected
from specreduce.pipeline import spectral_reduce_with_trace

from conftest import (complete_graph, grid_graph, random_connected_graph,
                      triangle, two_triangle_bridge)


# ----------------------------------------------------------------------
# options
# ----------------------------------------------------------------------
def test_options_validation():
    with pytest.raises(sr.GraphError):
        sr.ReduceOptions(psi=0.5)
    with pytest.raises(sr.GraphError):
        sr.ReduceOptions(gamma_max=0.0)
    with pytest.raises(sr.GraphError):
        sr.ReduceOptions(sigma=1.0)


# ----------------------------------------------------------------------
# routing
# ----------------------------------------------------------------------
def test_sparse_graph_aggregates_first():
    g = triangle()
    _, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=1.5))
    assert trace.branch == "aggregate-first"


def test_dense_graph_sparsifies_first():
    # |E| = 50 |V| on a random multigraph-free dense construction
    rng = np.random.default_rng(0)
    n = 120
    g = random_connected_graph(rng, n, extra_edges=50 * n - (n - 1))
    assert density(g) > 40.0
    hier, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=2.0, seed=0))
    assert trace.branch == "phase-b-first"
    assert trace.phase_b_applied
    # sparsification plus scaling must not disconnect anything
    assert all(is_connected(lvl) for lvl in hier.levels)


def test_branch_matches_density():
    for g in (triangle(), complete_graph(12), grid_graph(6, 6)):
        _, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=2.0))
        want = "phase-b-first" if density(g) > 40.0 else "aggregate-first"
        assert trace.branch == want


def test_ratio_one_single_level():
    g = grid_graph(5, 5)
    hier, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=1.0))
    assert hier.depth == 1
    assert hier.finest == g
    assert trace.achieved_ratio == 1.0 and not trace.stalled


# ----------------------------------------------------------------------
# reduction quality and schedule
# ----------------------------------------------------------------------
def test_bridge_graph_ratio_three():
    g = two_triangle_bridge()
    hier, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=3.0, seed=0))
    assert hier.coarsest.n == 2
    assert trace.achieved_ratio == pytest.approx(3.0, abs=0.5)


def test_monotone_shrinkage():
    g = grid_graph(20, 20)
    hier, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=10.0, seed=1))
    sizes = [lvl.n for lvl in hier.levels]
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
    assert all(r <= 4.0 + 1e-9 for r in trace.level_ratios)
    assert trace.achieved_ratio >= 10.0 or trace.stalled


def test_grid_low_spectrum_preserved():
    g = grid_graph(32, 32)
    hier, trace = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=8.0, seed=0))
    rep = sr.reduction_report(g, hier, trace.t_reduction_s)
    cmp = rep["eig_compare"]
    assert len(cmp["original"]) == 10 and len(cmp["reduced"]) == 10
    assert cmp["mean_rel_error"] <= 0.2
    assert rep["node_ratio"] == pytest.approx(8.0, rel=0.3)


def test_report_identity():
    g = grid_graph(6, 6)
    hier = sr.spectral_reduce(g, sr.ReduceOptions(psi=1.0))
    rep = sr.reduction_report(g, hier)
    assert rep["node_ratio"] == 1.0 and rep["edge_ratio"] == 1.0
    assert rep["eig_compare"]["mean_rel_error"] == pytest.approx(0.0, abs=1e-10)


def test_disconnected_input_uses_largest_component():
    g = sr.Graph.from_edges(9, [(0, 1), (1, 2), (2, 3), (3, 4), (5, 6),
                                (6, 7), (7, 8)], np.ones(7))
    hier, _ = spectral_reduce_with_trace(g, sr.ReduceOptions(psi=2.0))
    assert hier.finest.n == 5


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_hierarchy_composition_consistent(seed):
    """Composing the per-level mappings equals lifting step by step."""
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, int(rng.integers(20, 80)), extra_edges=40)
    hier = sr.spectral_reduce(g, sr.ReduceOptions(psi=4.0, seed=seed % 997))
    comp = hier.composed_map()
    y = rng.normal(size=hier.coarsest.n)
    stepwise = y
    for m in reversed(hier.maps):
        stepwise = m.lift(stepwise)
    np.testing.assert_allclose(comp.lift(y), stepwise, atol=1e-12)
    assert comp.n_fine == hier.finest.n and comp.n_coarse == hier.coarsest.n


def test_always_phase_b_on_sparse_graph():
    g = grid_graph(10, 10)
    hier, trace = spectral_reduce_with_trace(
        g, sr.ReduceOptions(psi=4.0, always_phase_b=True, seed=0))
    assert trace.phase_b_applied
    assert is_connected(hier.coarsest)


# ----------------------------------------------------------------------
# serialization
# ----------------------------------------------------------------------
def test_hierarchy_roundtrip(tmp_path):
    g = grid_graph(8, 8)
    hier = sr.spectral_reduce(g, sr.ReduceOptions(psi=4.0, seed=0))
    sr.save_hierarchy(hier, tmp_path / "h")
    back = sr.load_hierarchy(tmp_path / "h")
    assert back.depth == hier.depth
    for a, b in zip(hier.levels, back.levels):
        assert a.n == b.n and a.m == b.m
        np.testing.assert_array_equal(a.edges, b.edges)
        np.testing.assert_allclose(a.weights, b.weights, rtol=1e-12)
    for ma, mb in zip(hier.maps, back.maps):
        np.testing.assert_array_equal(ma.cluster_of, mb.cluster_of)
