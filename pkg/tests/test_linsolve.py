"""Laplacian solve contract: preconditioned CG on the all-ones complement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import specreduce as sr
from specreduce.linsolve import LaplacianSolver

from conftest import path_graph, random_connected_graph


def test_zero_rhs_zero_iterations():
    x, report = sr.solve_laplacian(path_graph(4), np.zeros(4))
    np.testing.assert_array_equal(x, np.zeros(4))
    assert report.iterations == 0 and report.converged


def test_p3_known_solution():
    # L @ (1, 0, -1) = (1, 0, -1) on the unit path, and (1,0,-1) is mean-free
    b = np.array([1.0, 0.0, -1.0])
    x, report = sr.solve_laplacian(path_graph(3), b)
    assert report.converged
    np.testing.assert_allclose(x, b, atol=1e-7)


def test_allones_rhs_rejected():
    with pytest.raises(sr.SolveError):
        sr.solve_laplacian(path_graph(3), np.ones(3))


def test_converged_residual_and_orthogonality(rng):
    for _ in range(5):
        g = random_connected_graph(rng, int(rng.integers(4, 60)))
        b = rng.normal(size=g.n)
        b -= b.mean()
        x, report = sr.solve_laplacian(g, b, tol=1e-10)
        assert report.converged
        res = np.linalg.norm(g.laplacian() @ x - b)
        assert res <= 1e-8 * np.linalg.norm(b)
        assert abs(x.sum()) <= 1e-8 * max(np.linalg.norm(x), 1e-300)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_tree_solves_always_converge(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    g = random_connected_graph(rng, n, extra_edges=0)
    b = rng.normal(size=n)
    b -= b.mean()
    x, report = sr.solve_laplacian(g, b)
    assert report.converged
    assert np.linalg.norm(g.laplacian() @ x - b) <= 1e-6 * np.linalg.norm(b)


def test_solver_object_reusable(rng):
    g = random_connected_graph(rng, 30)
    solver = LaplacianSolver(g)
    for _ in range(3):
        b = rng.normal(size=30)
        b -= b.mean()
        x, report = solver.solve(b)
        assert report.converged
