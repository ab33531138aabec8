#!/usr/bin/env python3
"""Reduce a grid graph and a random geometric graph at several ratios and
report how well the low end of the Laplacian spectrum is preserved.

Usage: python3 scripts/spectrum_preservation.py [--ratios 4 16] [--seed 0]
"""

import argparse
import time

import numpy as np
from scipy.spatial import cKDTree

import specreduce as sr
from specreduce.graph import largest_component
from specreduce.pipeline import normalized_eig_compare


def grid_graph(a, b):
    idx = np.arange(a * b).reshape(a, b)
    edges = np.vstack([
        np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()]),
        np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()]),
    ])
    return sr.Graph.from_edges(a * b, edges, np.ones(len(edges)))


def random_geometric_graph(n, mean_degree, seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    radius = np.sqrt(mean_degree / (np.pi * n))
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    g = sr.Graph.from_edges(n, pairs.astype(np.int64), np.ones(len(pairs)))
    return largest_component(g)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratios", type=float, nargs="+", default=[4.0, 16.0])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cases = [("64x64 grid", grid_graph(64, 64)),
             ("geometric n=4000 deg~8",
              random_geometric_graph(4000, 8.0, args.seed))]
    for name, g in cases:
        for psi in args.ratios:
            t0 = time.perf_counter()
            hier, trace = sr.spectral_reduce_with_trace(
                g, sr.ReduceOptions(psi=psi, seed=args.seed))
            dt = time.perf_counter() - t0
            cmp = normalized_eig_compare(g, hier.coarsest)
            print(f"{name:>24}  ratio {psi:5.1f}: "
                  f"{g.n} -> {hier.coarsest.n} nodes, "
                  f"mean spectral error {cmp['mean_rel_error']:.3%}, "
                  f"{dt:.2f} s ({trace.branch})")


if __name__ == "__main__":
    main()
