"""Shared graph builders and dense oracles for the test suite.

Oracles here are deliberately independent of the library internals: dense
numpy Laplacians, scipy eigensolvers and brute-force enumeration only.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest
import scipy.linalg

from specreduce import Graph


# ----------------------------------------------------------------------
# builders
# ----------------------------------------------------------------------
def path_graph(n: int, w: float = 1.0) -> Graph:
    e = np.column_stack([np.arange(n - 1), np.arange(1, n)])
    return Graph.from_edges(n, e, np.full(n - 1, w))


def grid_graph(nx: int, ny: int) -> Graph:
    edges = []
    for i in range(nx):
        for j in range(ny):
            a = i * ny + j
            if i + 1 < nx:
                edges.append((a, a + ny))
            if j + 1 < ny:
                edges.append((a, a + 1))
    e = np.array(edges, dtype=np.int64)
    return Graph.from_edges(nx * ny, e, np.ones(len(e)))


def triangle(weights=(1.0, 1.0, 1.0)) -> Graph:
    # edges in canonical order (0,1), (0,2), (1,2)
    return Graph.from_edges(3, [(0, 1), (0, 2), (1, 2)], list(weights))


def complete_graph(n: int) -> Graph:
    e = np.array(list(itertools.combinations(range(n), 2)), dtype=np.int64)
    return Graph.from_edges(n, e, np.ones(len(e)))


def two_triangle_bridge(bridge_w: float = 1.0, intra_w: float = 1.0) -> Graph:
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]
    weights = [intra_w] * 6
    edges.append((2, 3))
    weights.append(bridge_w)
    return Graph.from_edges(6, edges, weights)


def star_graph(leaves: int) -> Graph:
    e = np.column_stack([np.zeros(leaves, dtype=np.int64),
                         np.arange(1, leaves + 1)])
    return Graph.from_edges(leaves + 1, e, np.ones(leaves))


def random_connected_graph(rng, n: int, extra_edges: int = None,
                           wmin: float = 0.5, wmax: float = 2.0) -> Graph:
    """Random spanning tree plus extra random edges, random weights."""
    edges = {(min(i, int(j)), max(i, int(j)))
             for i, j in zip(range(1, n), (rng.integers(0, i) for i in range(1, n)))}
    if extra_edges is None:
        extra_edges = n
    tries = 0
    while len(edges) < n - 1 + extra_edges and tries < 50 * extra_edges:
        p, q = rng.integers(0, n, size=2)
        if p != q:
            edges.add((min(int(p), int(q)), max(int(p), int(q))))
        tries += 1
    e = np.array(sorted(edges), dtype=np.int64)
    w = rng.uniform(wmin, wmax, size=len(e))
    return Graph.from_edges(n, e, w)


# ----------------------------------------------------------------------
# dense oracles
# ----------------------------------------------------------------------
def dense_laplacian(g: Graph) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for (p, q), w in zip(g.edges, g.weights):
        lap[p, p] += w
        lap[q, q] += w
        lap[p, q] -= w
        lap[q, p] -= w
    return lap


def oracle_eigvals(g: Graph) -> np.ndarray:
    return np.sort(scipy.linalg.eigvalsh(dense_laplacian(g)))


def oracle_pencil_eigs(g: Graph, p: Graph):
    """All eigenpairs of L_G u = lambda L_P u restricted to the complement
    of the all-ones vector, ascending."""
    basis = scipy.linalg.null_space(np.ones((1, g.n)))
    a = basis.T @ dense_laplacian(g) @ basis
    b = basis.T @ dense_laplacian(p) @ basis
    vals, vecs = scipy.linalg.eigh(a, b)
    return vals, basis @ vecs


def oracle_cut_metrics(g: Graph, labels, k: int):
    """Brute-force recomputation of edge cut, ratio cut and normalized cut."""
    labels = np.asarray(labels)
    cut = np.zeros(k)
    vol = np.zeros(k)
    for (p, q), w in zip(g.edges, g.weights):
        vol[labels[p]] += w
        vol[labels[q]] += w
        if labels[p] != labels[q]:
            cut[labels[p]] += w
            cut[labels[q]] += w
    sizes = np.bincount(labels, minlength=k).astype(float)
    theta = sum(cut[i] / vol[i] for i in range(k) if vol[i] > 0)
    rho = sum(cut[i] / sizes[i] for i in range(k))
    return float(cut.sum()), float(rho), float(theta)


def enumerate_bipartitions(n: int):
    """All nontrivial 2-colorings up to complement."""
    for bits in range(1, 2 ** (n - 1)):
        labels = np.array([(bits >> i) & 1 for i in range(n)])
        if labels.min() == labels.max():
            continue
        yield labels


def optimal_bipartition_theta(g: Graph) -> float:
    best = np.inf
    for labels in enumerate_bipartitions(g.n):
        _, _, theta = oracle_cut_metrics(g, labels, 2)
        best = min(best, theta)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
